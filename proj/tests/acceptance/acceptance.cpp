// Acceptance runner: one PASS/FAIL line per criterion.
//
//   coherent_acceptance                 criteria 1, 4, 5, 6 (the fast ones)
//   coherent_acceptance --criterion 2   nine-rectangle comparison (add --smoke for 5k epochs)
//   coherent_acceptance --criterion 3   hierarchy sweep
//   coherent_acceptance --all           everything
//   --allow-known-deviations            see semantics_properties()
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "coherent/constraint_loss.hpp"
#include "coherent/constraint_module.hpp"
#include "coherent/experiments.hpp"
#include "coherent/metrics.hpp"
#include "coherent/semantics.hpp"
#include "oracles.hpp"

using namespace coherent;
namespace t = coherent::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects failed sub-checks; prints at most a few of them.
struct Checks {
    std::size_t total = 0;
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        ++total;
        if (!ok) failures.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol, what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
    }
    bool ok() const { return failures.empty(); }
    void dump() const {
        for (std::size_t i = 0; i < failures.size() && i < 10; ++i) std::printf("    fail: %s\n", failures[i].c_str());
        if (failures.size() > 10) std::printf("    ... %zu more\n", failures.size() - 10);
    }
};

bool report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    return ok;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ClassSet named(const RuleSet& rs, std::initializer_list<const char*> names) {
    ClassSet s(rs.classes().size());
    for (auto n : names) s.insert(rs.classes().at(n));
    return s;
}

ClassSet to_set(const std::vector<bool>& b) {
    ClassSet s(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i]) s.insert(static_cast<ClassId>(i));
    return s;
}

// ---------------------------------------------------------------------------
// 1. Worked examples
// ---------------------------------------------------------------------------

bool worked_examples() {
    const auto t0 = Clock::now();
    Checks ck;
    constexpr double tol = 1e-12;

    // Stratification of the five-class program.
    auto p5 = parse_rules("A1 -> A\nA2 -> A\nA, !A1 -> A2\nA3 -> A4\n");
    auto st5 = comp_strata(p5);
    ck.expect(st5.num_strata == 2, "five-class program has two strata");
    for (auto n : {"A1", "A3", "A4"}) ck.expect(st5.class_stratum[p5.classes().at(n)] == 1, std::string(n) + " in stratum 1");
    for (auto n : {"A", "A2"}) ck.expect(st5.class_stratum[p5.classes().at(n)] == 2, std::string(n) + " in stratum 2");

    // Stable models of the same program.
    const auto n5 = p5.classes().size();
    ck.expect(stable_model(p5, ClassSet(n5)) == ClassSet(n5), "stable model of the bare program is empty");
    ck.expect(stable_model(p5, named(p5, {"A"})) == named(p5, {"A2", "A"}), "stable model with fact A");
    ck.expect(stable_model(p5, named(p5, {"A", "A4"})) == named(p5, {"A2", "A4", "A"}), "stable model with facts A, A4");

    // Three-class program: closure, matrices, module outputs, loss targets.
    auto p3 = parse_rules("class: A1, A2, A\nA1 -> A\nA2 -> A\nA, !A1 -> A2\n");
    auto st3 = comp_strata(p3);
    auto closed = close_stratum(p3, st3, 2);
    ck.expect(close_stratum(p3, st3, 1).empty(), "first closed stratum is empty");
    ck.expect(closed.size() == 4 && closed.rules()[3] == Rule(1, {0}, {0}), "closure adds A1, !A1 -> A2");
    auto c3 = compile(p3);
    ck.expect(c3.body_pos_matrix(1) == Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}}), "B+ matrix");
    ck.expect(c3.body_neg_matrix(1) == Matrix::from_rows({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {1, 0, 0}}), "B- matrix");
    ck.expect(c3.head_matrix(1) == Matrix::from_rows({{0, 0, 0, 0}, {0, 0, 1, 1}, {1, 1, 0, 0}}), "H matrix");

    const std::vector<double> h{0.2, 0.3, 0.6};
    {
        // v+ and v- recomputed from the compiled matrices.
        auto bp = c3.body_pos_matrix(1), bn = c3.body_neg_matrix(1);
        const double want_p[] = {0.2, 0.3, 0.6, 0.2}, want_n[] = {1, 1, 0.8, 0.8};
        for (std::size_t j = 0; j < 4; ++j) {
            double vp = 1, vn = 1;
            for (std::size_t k = 0; k < 3; ++k) {
                vp = std::min(vp, bp(j, k) * h[k] + (1 - bp(j, k)));
                vn = std::min(vn, bn(j, k) * (1 - h[k]) + (1 - bn(j, k)));
            }
            ck.near(vp, want_p[j], tol, "v+ entry " + std::to_string(j));
            ck.near(vn, want_n[j], tol, "v- entry " + std::to_string(j));
        }
    }
    auto cm = cm_forward(c3, h);
    ck.near(cm[0], 0.2, tol, "CM_A1");
    ck.near(cm[1], 0.6, tol, "CM_A2");
    ck.near(cm[2], 0.6, tol, "CM_A");
    auto cm2 = cm_forward(c3, std::vector<double>{0.6, 0.3, 0.3});
    ck.near(cm2[0], 0.6, tol, "variant CM_A1");
    ck.near(cm2[1], 0.4, tol, "variant CM_A2");
    ck.near(cm2[2], 0.6, tol, "variant CM_A");

    const std::vector<double> y3{1, 0, 1};
    auto tg = closs_targets(c3, h, y3);
    ck.near(tg[0], 0.2, tol, "target A1");
    ck.near(tg[1], 0.8, tol, "target A2");
    ck.near(tg[2], 0.6, tol, "target A");
    ck.near(closs(c3, h, y3).loss, -2 * std::log(0.2) - std::log(0.6), tol, "constraint loss");

    // Hierarchy A1 -> A with h = (0.3, 0.1), y = (0, 1).
    auto ch = compile(parse_rules("A1 -> A\n"));
    const std::vector<double> hh{0.3, 0.1}, yh{0, 1};
    auto g = closs(ch, hh, yh).gradient;
    ck.near(g[0], 1 / 0.7, tol, "dCLoss/dh_A1");
    ck.near(g[0], 1.4286, 1e-4, "dCLoss/dh_A1 rounded");
    ck.near(g[1], -10.0, tol, "dCLoss/dh_A");
    auto gb = cm_bce_loss(ch, Matrix::from_rows({hh}), Matrix::from_rows({yh})).gradient;
    ck.near(gb(0, 0), 1 / 0.7 - 1 / 0.3, tol, "dBCE(CM)/dh_A1");
    ck.near(gb(0, 0), -1.905, 1e-3, "dBCE(CM)/dh_A1 rounded");
    ck.near(gb(0, 1), 0.0, tol, "dBCE(CM)/dh_A");

    ck.dump();
    return report(1, "worked examples", ck.ok(),
                  fmt("%zu/%zu checks within tolerance (%.2f s)", ck.total - ck.failures.size(), ck.total,
                      seconds_since(t0)));
}

// ---------------------------------------------------------------------------
// 2. Nine rectangles
// ---------------------------------------------------------------------------

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

bool nine_rect(bool smoke) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.runs = 10;
    cfg.epochs = smoke ? 5000 : 20000;
    cfg.hidden = 7;
    cfg.learning_rate = 1e-2;
    cfg.threads = worker_count();
    auto r = run_experiment(ExperimentKind::nine_rect, cfg);
    const double secs = seconds_since(t0);
    const auto& ccn = r.find(0, "ccn");
    const auto& base = r.find(0, "h_cm");
    const double cm = ccn.mean("au_prc"), cs = ccn.stddev("au_prc");
    const double bm = base.mean("au_prc"), bs = base.stddev("au_prc");
    const double limit = smoke ? 300 : 1800;
    bool ok;
    if (smoke) {
        ok = cm > bm && cs <= bs && secs <= limit;
    } else {
        ok = cm >= 0.94 && cm <= 1.0 && bm <= cm - 0.015 && cs <= bs && secs <= limit;
    }
    return report(2, smoke ? "nine rectangles (5k-epoch smoke)" : "nine rectangles", ok,
                  fmt("CCN %.4f +- %.4f, h+CM %.4f +- %.4f, gap %.4f, %.0f s (limit %.0f s)", cm, cs, bm, bs, cm - bm,
                      secs, limit));
}

// ---------------------------------------------------------------------------
// 3. Hierarchy sweep
// ---------------------------------------------------------------------------

bool hmc_sweep() {
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.runs = 10;
    cfg.threads = worker_count();
    auto r = run_experiment(ExperimentKind::hmc_sweep, cfg);
    const double secs = seconds_since(t0);
    Checks ck;
    for (std::size_t s = 1; s <= kSweepSteps; ++s) {
        const double c = r.find(s, "ccn").mean("au_prc");
        const double f = r.find(s, "f_plus").mean("au_prc");
        const double g = r.find(s, "g_plus").mean("au_prc");
        std::printf("    step %zu: CCN %.4f  f+ %.4f  g+ %.4f\n", s, c, f, g);
        ck.expect(c >= std::max(f, g) - 0.02, fmt("step %zu: CCN %.4f below max(f+, g+) - 0.02", s, c));
    }
    const double f1 = r.find(1, "f_plus").mean("au_prc"), f9 = r.find(9, "f_plus").mean("au_prc");
    const double g1 = r.find(1, "g_plus").mean("au_prc"), g9 = r.find(9, "g_plus").mean("au_prc");
    ck.expect(f1 < f9, fmt("f+ step 1 %.4f not below step 9 %.4f", f1, f9));
    ck.expect(g9 < g1, fmt("g+ step 9 %.4f not below step 1 %.4f", g9, g1));
    ck.expect(secs <= 1800, fmt("took %.0f s", secs));
    ck.dump();
    return report(3, "hierarchy sweep", ck.ok(),
                  fmt("f+ %.4f -> %.4f, g+ %.4f -> %.4f, %zu/%zu checks, %.0f s", f1, f9, g1, g9,
                      ck.total - ck.failures.size(), ck.total, secs));
}

// ---------------------------------------------------------------------------
// 4. Semantics on random programs
// ---------------------------------------------------------------------------

// Literal uniqueness (over all subsets of classes) is known not to hold: with
// `!C1 -> C0; C2 -> C1; C1 -> C2` and nothing predicted, both {C0} and {C1, C2}
// are extensions that are coherent, supported and minimal. Only {C0} is the
// stable model. The stratum-wise statement is checked separately and must hold.
bool allow_known_deviations = false;

bool semantics_properties() {
    const auto t0 = Clock::now();
    Checks ck, literal;
    Rng rng(2024);
    t::ProgramShape shape;
    shape.max_classes = 10;
    std::size_t enumerated = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        auto rs = t::random_program(rng, shape);
        auto c = compile(rs);
        const auto st = comp_strata(rs);
        const auto n = rs.classes().size();
        const auto tag = "program " + std::to_string(iter);
        for (int inst = 0; inst < 3; ++inst) {
            auto h = t::random_scores(rng, n, false);
            auto out = cm_forward(c, h);
            ck.expect(t::fixed_point_residual(rs, h, out) <= 1e-12, tag + ": fixed-point residual");
            ck.expect(check_constraint_violation(rs, out).empty(), tag + ": constraint violation");

            const auto base = t::above(h);
            const auto m = t::above(out);
            const auto bs = to_set(base), ms = to_set(m);
            ck.expect(bs.subset_of(ms), tag + ": extension");
            ck.expect(is_coherent(rs, ms), tag + ": coherence");
            ck.expect(t::set_supported(rs, base, m), tag + ": supportedness");
            ck.expect(t::set_minimal(rs, base, m), tag + ": minimality");
            auto stable = t::all_stable_models(rs, base);
            ck.expect(stable.size() == 1 && stable[0] == m, tag + ": predicted set differs from the stable model");
            auto strata_sets = t::stratumwise_supported_minimal_sets(rs, st, base);
            ck.expect(strata_sets.size() == 1 && strata_sets[0] == m, tag + ": stratum-wise uniqueness");
            if (n <= 10) {
                ++enumerated;
                auto sets = t::all_supported_minimal_sets(rs, base);
                literal.expect(sets.size() == 1 && sets[0] == m,
                               tag + ": " + std::to_string(sets.size()) + " sets satisfy the four properties globally");
            }

            auto y = t::random_labels(rng, n);
            auto g = closs(c, h, y).gradient;
            for (std::size_t a = 0; a < n; ++a)
                ck.expect(y[a] == 0.0 ? g[a] >= 0.0 : g[a] <= 0.0, tag + ": gradient sign");
        }
    }
    for (int iter = 0; iter < 1000; ++iter) {
        auto rs = t::random_hierarchy(rng, 2 + rng.below(9), 0.3);
        if (rs.empty()) continue;
        auto c = compile(rs);
        const auto n = rs.classes().size();
        auto h = t::random_scores(rng, n, false);
        // Ground truth closed under the hierarchy.
        auto lm = t::least_model(rs, t::above(t::random_labels(rng, n, 0.3)));
        std::vector<double> y(n);
        for (std::size_t a = 0; a < n; ++a) y[a] = lm[a] ? 1.0 : 0.0;
        auto general_cm = cm_forward(c, h);
        auto fast_cm = cm_forward_hmc(c.descendant_mask(), h);
        auto general = closs(c, h, y);
        auto fast = closs_hmc(c.descendant_mask(), h, y);
        bool same = std::abs(general.loss - fast.loss) <= 1e-12;
        for (std::size_t a = 0; a < n; ++a) {
            same = same && std::abs(general_cm[a] - fast_cm[a]) <= 1e-12;
            same = same && std::abs(general.targets[a] - fast.targets[a]) <= 1e-12;
            same = same && std::abs(general.gradient[a] - fast.gradient[a]) <= 1e-12;
        }
        ck.expect(same, "hierarchy " + std::to_string(iter) + ": fast path differs from general path");
    }
    const double secs = seconds_since(t0);
    ck.expect(secs <= 300, fmt("took %.0f s", secs));
    ck.dump();
    literal.dump();
    report(4, "semantics on 1000 random programs", ck.ok() && literal.ok(),
           fmt("%zu/%zu checks; global uniqueness %zu/%zu over %zu exhaustively enumerated instances; %.1f s",
               ck.total - ck.failures.size(), ck.total, literal.total - literal.failures.size(), literal.total,
               enumerated, secs));
    if (ck.ok() && !literal.ok() && allow_known_deviations) {
        std::printf("    only global uniqueness failed; allowed as a known deviation\n");
        return true;
    }
    return ck.ok() && literal.ok();
}

// ---------------------------------------------------------------------------
// 5. Gradients
// ---------------------------------------------------------------------------

// Loss targets straight from the per-class definition, one class at a time.
std::vector<double> scalar_targets(const RuleSet& rs, std::span<const double> h, std::span<const double> y) {
    auto st = comp_strata(rs);
    std::vector<double> tgt(h.begin(), h.end());
    for (std::size_t i = 1; i <= st.num_strata; ++i) {
        auto closed = close_stratum(rs, st, i);
        for (std::size_t a = 0; a < tgt.size(); ++a) {
            if (st.class_stratum[a] != i) continue;
            double best = h[a];
            for (const auto& r : closed.rules()) {
                if (r.head != a) continue;
                double v = 1.0;
                for (auto b : r.body_pos) {
                    const double x = st.class_stratum[b] == i ? h[b] : tgt[b];
                    v = std::min(v, y[a] == 1.0 ? x * y[b] : x * (1 - y[b]) + y[b]);
                }
                for (auto b : r.body_neg) {
                    const double x = 1 - tgt[b];
                    v = std::min(v, y[a] == 1.0 ? x * (1 - y[b]) : x * y[b] + (1 - y[b]));
                }
                best = std::max(best, v);
            }
            tgt[a] = best;
        }
    }
    return tgt;
}

bool gradients() {
    const auto t0 = Clock::now();
    Checks ck;
    Rng rng(99);
    std::size_t checked = 0;
    double worst = 0;
    while (checked < 200) {
        auto rs = t::random_program(rng);
        auto c = compile(rs);
        const auto n = rs.classes().size();
        auto h = t::random_scores(rng, n, false);
        auto y = t::random_labels(rng, n);
        if (t::near_tie(h, 1e-3)) continue;
        ++checked;
        auto g = closs(c, h, y).gradient;
        auto num = t::numeric_gradient([&](const std::vector<double>& x) { return closs(c, x, y).loss; }, h, 1e-6);
        for (std::size_t a = 0; a < n; ++a) {
            const double rel = std::abs(g[a] - num[a]) / std::max(1.0, std::abs(num[a]));
            worst = std::max(worst, rel);
            ck.expect(rel <= 1e-4, fmt("instance %zu class %zu: analytic %.8g numeric %.8g", checked, a, g[a], num[a]));
        }
    }
    std::size_t exact = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        auto rs = t::random_program(rng);
        auto c = compile(rs);
        const auto n = rs.classes().size();
        auto h = t::random_scores(rng, n, iter % 2 == 0);
        auto y = t::random_labels(rng, n);
        auto want = scalar_targets(rs, h, y);
        auto got = closs(c, Matrix::from_rows({h}), Matrix::from_rows({y}));
        double loss = 0;
        for (std::size_t a = 0; a < n; ++a) {
            const double q = y[a] == 1.0 ? want[a] : 1 - want[a];
            loss -= std::log(std::clamp(q, kLogClamp, 1 - kLogClamp));
        }
        const bool same = std::equal(want.begin(), want.end(), got.targets.data().begin()) &&
                          std::abs(loss - got.loss) <= 1e-12 * std::max(1.0, std::abs(loss));
        exact += same;
        ck.expect(same, "instance " + std::to_string(iter) + ": matrix path differs from scalar definition");
    }
    ck.dump();
    return report(5, "gradients", ck.ok(),
                  fmt("200 finite-difference instances, worst relative error %.2e; %zu/1000 matrix-path instances "
                      "identical to the scalar definition (%.1f s)",
                      worst, exact, seconds_since(t0)));
}

// ---------------------------------------------------------------------------
// 6. Metrics
// ---------------------------------------------------------------------------

bool metrics() {
    const auto t0 = Clock::now();
    Checks ck;
    Rng rng(6);
    for (int iter = 0; iter < 100; ++iter) {
        const auto rows = 1 + rng.below(8), cols = 1 + rng.below(6);
        Matrix s(rows, cols), y(rows, cols);
        s.data() = t::random_scores(rng, rows * cols, iter % 2 == 0);
        y.data() = t::random_labels(rng, rows * cols, 0.4);
        if (std::count(y.data().begin(), y.data().end(), 1.0) == 0) y(0, 0) = 1.0;
        auto r = mc_metrics(s, y);
        const auto tag = "batch " + std::to_string(iter);
        ck.near(r.au_prc, t::oracle_au_prc(s, y), 1e-12, tag + " au_prc");
        ck.near(r.average_precision, t::oracle_average_precision(s, y), 1e-12, tag + " average_precision");
        ck.near(r.coverage_error, t::oracle_coverage(s, y), 1e-12, tag + " coverage");
        ck.near(r.hamming_loss, t::oracle_hamming(s, y), 1e-12, tag + " hamming");
        ck.near(r.multilabel_accuracy, t::oracle_accuracy(s, y), 1e-12, tag + " accuracy");
        ck.near(r.one_error, t::oracle_one_error(s, y), 1e-12, tag + " one_error");
        ck.near(r.ranking_loss, t::oracle_ranking_loss(s, y), 1e-12, tag + " ranking_loss");
    }
    ck.dump();
    return report(6, "metrics", ck.ok(),
                  fmt("%zu/%zu metric values match the oracles (%.2f s)", ck.total - ck.failures.size(), ck.total,
                      seconds_since(t0)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("Acceptance checks");
    int criterion = 0;
    bool smoke = false, all = false;
    app.add_option("--criterion", criterion, "Run one criterion (1-6)")->check(CLI::Range(1, 6));
    app.add_flag("--smoke", smoke, "Criterion 2 with 5k epochs");
    app.add_flag("--all", all, "Run every criterion including the long training runs");
    app.add_flag("--allow-known-deviations", allow_known_deviations,
                 "Exit 0 when criterion 4 fails only on global uniqueness (the line still reads FAIL)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<bool()>> run = {
        worked_examples, [&] { return nine_rect(smoke); }, hmc_sweep, semantics_properties, gradients, metrics,
    };
    std::vector<int> selected;
    if (criterion) selected = {criterion};
    else if (all) selected = {1, 2, 3, 4, 5, 6};
    else selected = {1, 4, 5, 6};

    bool ok = true;
    for (int c : selected) {
        try {
            ok = run[static_cast<std::size_t>(c - 1)]() && ok;
        } catch (const std::exception& e) {
            report(c, "error", false, e.what());
            ok = false;
        }
    }
    return ok ? 0 : 1;
}
