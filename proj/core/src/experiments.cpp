#include "coherent/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "coherent/constraint_module.hpp"
#include "coherent/random.hpp"

namespace coherent {

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::hmc_sweep: return "hmc_sweep";
        case ExperimentKind::lcmc_sweep: return "lcmc_sweep";
        case ExperimentKind::nine_rect: return "nine_rect";
    }
    return "unknown";
}

ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "hmc_sweep") return ExperimentKind::hmc_sweep;
    if (s == "lcmc_sweep") return ExperimentKind::lcmc_sweep;
    if (s == "nine_rect") return ExperimentKind::nine_rect;
    throw Error("unknown experiment '" + s + "' (expected hmc_sweep, lcmc_sweep or nine_rect)");
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {std::nan(""), std::nan("")};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size()))};
}

double StepSummary::mean(const std::string& metric) const {
    for (const auto& [k, v] : metrics)
        if (k == metric) return v.first;
    throw Error("no metric '" + metric + "' in summary");
}

double StepSummary::stddev(const std::string& metric) const {
    for (const auto& [k, v] : metrics)
        if (k == metric) return v.second;
    throw Error("no metric '" + metric + "' in summary");
}

const StepSummary& ExperimentReport::find(std::size_t step, const std::string& system) const {
    for (const auto& s : summary)
        if (s.step == step && s.system == system) return s;
    throw Error("no summary for step " + std::to_string(step) + " system " + system);
}

DecisionGrid decision_grid(const TrainedSystem& s, std::size_t resolution) {
    Matrix x(resolution * resolution, 2);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            x(i * resolution + j, 0) = (static_cast<double>(j) + 0.5) / static_cast<double>(resolution);
            x(i * resolution + j, 1) = (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
        }
    }
    const Matrix out = s.infer(x);
    DecisionGrid g;
    g.header = {"x", "y"};
    if (s.circuit) {
        for (const auto& n : s.circuit->classes().names()) g.header.push_back(n);
    } else {
        for (std::size_t c = 0; c < out.cols(); ++c) g.header.push_back("c" + std::to_string(c));
    }
    g.values = Matrix(x.rows(), 2 + out.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        g.values(r, 0) = x(r, 0);
        g.values(r, 1) = x(r, 1);
        for (std::size_t c = 0; c < out.cols(); ++c) g.values(r, 2 + c) = out(r, c);
    }
    return g;
}

namespace {

struct SystemSpec {
    const char* name;
    Wrapper wrapper;
};

std::vector<SystemSpec> systems_for(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::hmc_sweep:
            return {{"ccn", Wrapper::ccn_closs}, {"f_plus", Wrapper::f_plus_min}, {"g_plus", Wrapper::g_plus_max}};
        case ExperimentKind::lcmc_sweep:
            return {{"ccn", Wrapper::ccn_closs}, {"f_plus", Wrapper::h_plus_postproc}};
        case ExperimentKind::nine_rect:
            return {{"ccn", Wrapper::ccn_closs}, {"h_cm", Wrapper::h_cm_bce}};
    }
    return {};
}

struct World {
    RectangleWorld world;
    RuleSet rules;
    std::string description;
};

std::string rect_str(const Rect& r) {
    std::ostringstream os;
    os << "[" << r.x0 << "," << r.x1 << "]x[" << r.y0 << "," << r.y1 << "]";
    return os.str();
}

World make_world(ExperimentKind k, std::size_t step, std::uint64_t seed, std::size_t samples) {
    if (k == ExperimentKind::nine_rect) {
        return {nine_rect_world(seed, samples), nine_rect_rules(), "nine nested rectangles"};
    }
    auto [r1, r2] = sweep_geometry(step);
    const auto desc = "R1=" + rect_str(r1) + " R2=" + rect_str(r2);
    if (k == ExperimentKind::hmc_sweep) return {hmc_world(r1, r2, seed, samples), hmc_world_rules(), desc};
    return {lcmc_world(r1, r2, seed, samples), lcmc_world_rules(), desc};
}

const char* const kMetricNames[] = {"au_prc",    "average_precision", "coverage_error", "hamming_loss",
                                    "multilabel_accuracy", "one_error", "ranking_loss",  "delegation"};

std::vector<double> metric_values(const RunOutcome& o) {
    const auto& m = o.metrics;
    return {m.au_prc,    m.average_precision, m.coverage_error, m.hamming_loss, m.multilabel_accuracy,
            m.one_error, m.ranking_loss,      o.delegation};
}

}  // namespace

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& cfg) {
    ExperimentReport rep;
    rep.kind = kind;
    rep.config = cfg;
    rep.config.on_progress = nullptr;
    std::vector<std::size_t> steps = cfg.steps;
    if (kind == ExperimentKind::nine_rect) {
        steps = {0};
    } else if (steps.empty()) {
        for (std::size_t s = 1; s <= kSweepSteps; ++s) steps.push_back(s);
    }
    const auto systems = systems_for(kind);
    const std::size_t hidden = cfg.hidden ? cfg.hidden : (kind == ExperimentKind::nine_rect ? 7 : 4);
    const auto kind_id = static_cast<std::uint64_t>(kind);

    for (auto s : steps) rep.geometry.push_back(make_world(kind, s, 0, 1).description);

    struct Job {
        std::size_t step, run, sys;
    };
    std::vector<Job> jobs;
    for (auto s : steps)
        for (std::size_t r = 1; r <= cfg.runs; ++r)
            for (std::size_t k = 0; k < systems.size(); ++k) jobs.push_back({s, r, k});
    rep.runs.resize(jobs.size());
    std::vector<std::optional<DecisionGrid>> grids(jobs.size());

    std::atomic<std::size_t> next{0}, done{0};
    std::mutex progress_mu;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            const auto& job = jobs[i];
            auto& out = rep.runs[i];
            out.step = job.step;
            out.run = job.run;
            out.system = systems[job.sys].name;
            out.delegation = std::numeric_limits<double>::quiet_NaN();
            try {
                const auto world = make_world(kind, job.step, derive_seed(cfg.seed, {kind_id, job.step, job.run, 0}),
                                              cfg.samples);
                const auto data = gen_rectangles(world.world);
                auto circuit = std::make_shared<const ConstraintCircuit>(compile(world.rules));
                const auto init = init_model({2, hidden, circuit->num_classes()}, Activation::tanh,
                                             derive_seed(cfg.seed, {kind_id, job.step, job.run, 1}));
                TrainConfig tc;
                tc.epochs = cfg.epochs;
                tc.adam.learning_rate = cfg.learning_rate;
                tc.seed = derive_seed(cfg.seed, {kind_id, job.step, job.run, 2});
                auto res = train(init, data, circuit, systems[job.sys].wrapper, tc);
                const Matrix xt = data.features_of(data.test);
                const Matrix yt = data.labels_of(data.test);
                out.metrics = mc_metrics(res.system.infer(xt), yt);
                if (kind == ExperimentKind::hmc_sweep && systems[job.sys].wrapper == Wrapper::ccn_closs) {
                    std::vector<std::size_t> in_a1;
                    for (std::size_t r = 0; r < yt.rows(); ++r)
                        if (yt(r, 0) != 0.0) in_a1.push_back(r);
                    const Matrix h = res.system.scores(xt.select_rows(in_a1));
                    out.delegation = in_a1.empty() ? 0.0 : delegation_rate(*circuit, h, circuit->classes().at("A"));
                }
                if (cfg.grid_resolution > 0 && job.run == 1) {
                    auto g = decision_grid(res.system, cfg.grid_resolution);
                    g.step = job.step;
                    g.system = out.system;
                    grids[i] = std::move(g);
                }
            } catch (const Error& e) {
                out.diverged = true;
                out.error = e.what();
            }
            const auto d = done.fetch_add(1) + 1;
            if (cfg.on_progress) {
                std::lock_guard lock(progress_mu);
                cfg.on_progress(d, jobs.size());
            }
        }
    };
    const std::size_t nthreads = std::max<std::size_t>(1, std::min(cfg.threads, jobs.size()));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (auto& g : grids)
        if (g) rep.grids.push_back(std::move(*g));

    for (auto s : steps) {
        for (const auto& sys : systems) {
            StepSummary sum;
            sum.step = s;
            sum.system = sys.name;
            std::vector<std::vector<double>> cols(std::size(kMetricNames));
            for (const auto& o : rep.runs) {
                if (o.step != s || o.system != sys.name || o.diverged) continue;
                ++sum.runs;
                const auto v = metric_values(o);
                for (std::size_t m = 0; m < v.size(); ++m) cols[m].push_back(v[m]);
            }
            for (std::size_t m = 0; m < cols.size(); ++m) sum.metrics.emplace_back(kMetricNames[m], mean_std(cols[m]));
            rep.summary.push_back(std::move(sum));
        }
    }
    return rep;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

std::string runs_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "experiment,step,run,system";
    for (auto* m : kMetricNames) os << ',' << m;
    os << ",diverged,error\n";
    for (const auto& o : r.runs) {
        os << to_string(r.kind) << ',' << o.step << ',' << o.run << ',' << o.system;
        for (double v : metric_values(o)) os << ',' << (o.diverged ? "" : num(v));
        os << ',' << (o.diverged ? 1 : 0) << ',' << format_csv_row({o.error}) << '\n';
    }
    return os.str();
}

std::string summary_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "experiment,step,geometry,system,runs";
    for (auto* m : kMetricNames) os << ',' << m << "_mean," << m << "_std";
    os << '\n';
    for (const auto& s : r.summary) {
        std::string geom;
        if (r.kind == ExperimentKind::nine_rect) {
            geom = r.geometry.front();
        } else {
            const auto steps = r.config.steps;
            std::size_t idx = 0;
            if (steps.empty()) idx = s.step - 1;
            else idx = static_cast<std::size_t>(std::find(steps.begin(), steps.end(), s.step) - steps.begin());
            geom = r.geometry.at(idx);
        }
        os << to_string(r.kind) << ',' << s.step << ',' << format_csv_row({geom}) << ',' << s.system << ',' << s.runs;
        for (const auto& [name, ms] : s.metrics) os << ',' << num(ms.first) << ',' << num(ms.second);
        os << '\n';
    }
    return os.str();
}

}  // namespace coherent
