// coherent: command-line front end for rule compilation, coherent evaluation,
// training and the synthetic experiments.
//
// Exit codes: 0 success, 1 usage, 2 semantic problem (bad rules, malformed
// input, detected violations), 3 runtime failure.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coherent/circuit.hpp"
#include "coherent/constraint_module.hpp"
#include "coherent/dataset.hpp"
#include "coherent/experiments.hpp"
#include "coherent/metrics.hpp"
#include "coherent/random.hpp"
#include "coherent/semantics.hpp"
#include "coherent/strata.hpp"
#include "coherent/trainer.hpp"

namespace fs = std::filesystem;
using namespace coherent;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitSemantic = 2;
constexpr int kExitRuntime = 3;

// Raised for input that fails a consistency check (exit code 2).
struct Violation : Error {
    using Error::Error;
};

struct Globals {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string out_dir = ".";
};

fs::path out_path(const Globals& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
    if (!f) throw Error("write failed: " + p.string());
}

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        write_file(path, text);
    }
}

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Columns of `csv` named after `classes`, in class order.
Matrix class_columns(const CsvTable& csv, const ClassTable& classes, const std::string& what) {
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < csv.header.size(); ++i) col.emplace(csv.header[i], i);
    std::vector<std::size_t> idx;
    for (const auto& n : classes.names()) {
        auto it = col.find(n);
        if (it == col.end()) throw ParseError(what + ": missing column '" + n + "'");
        idx.push_back(it->second);
    }
    Matrix m(csv.rows.size(), idx.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        for (std::size_t c = 0; c < idx.size(); ++c) {
            const auto& cell = csv.rows[r][idx[c]];
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size()) {
                throw ParseError(what + ": non-numeric cell '" + cell + "'", r + 2, idx[c] + 1);
            }
            m(r, c) = v;
        }
    }
    return m;
}

CsvTable load_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

ConstraintCircuit load_circuit(const std::string& path) { return circuit_from_json(read_text_file(path)); }

// Rules rewritten over `names` (the dataset's label order).
RuleSet reorder_classes(const RuleSet& rs, const std::vector<std::string>& names) {
    ClassTable table(names);
    for (const auto& n : rs.classes().names()) {
        if (!table.find(n)) throw SemanticError("rule class '" + n + "' is not a label column");
    }
    RuleSet out(table);
    auto map = [&](ClassId c) { return table.at(rs.classes().name(c)); };
    for (const auto& r : rs.rules()) {
        std::vector<ClassId> pos, neg;
        for (auto c : r.body_pos) pos.push_back(map(c));
        for (auto c : r.body_neg) neg.push_back(map(c));
        out.add(Rule(map(r.head), pos, neg));
    }
    return out;
}

// The closed rules of every stratum, which the circuit output must satisfy.
RuleSet circuit_rules(const ConstraintCircuit& c) {
    RuleSet rs(c.classes());
    for (std::size_t k = 0; k < c.num_strata(); ++k)
        for (const auto& r : c.stratum_rules(k)) rs.add(r);
    return rs;
}

std::size_t count_violating_rows(const RuleSet& rs, const Matrix& scores) {
    std::size_t bad = 0;
    for (std::size_t r = 0; r < scores.rows(); ++r)
        if (!check_constraint_violation(rs, scores.row(r)).empty()) ++bad;
    return bad;
}

std::string scores_csv(const ClassTable& classes, const Matrix& s, double threshold, bool with_labels) {
    std::ostringstream os;
    auto header = classes.names();
    if (with_labels) header.push_back("labels");
    os << format_csv_row(header) << '\n';
    for (std::size_t r = 0; r < s.rows(); ++r) {
        std::vector<std::string> cells;
        for (double v : s.row(r)) cells.push_back(num(v));
        if (with_labels) {
            std::string set;
            for (std::size_t c = 0; c < s.cols(); ++c) {
                if (s(r, c) > threshold) set += (set.empty() ? "" : "|") + classes.name(c);
            }
            cells.push_back(set);
        }
        os << format_csv_row(cells) << '\n';
    }
    return os.str();
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        const auto v = std::stoull(item, &used);
        if (used != item.size() || v == 0) throw ParseError("bad layer size '" + item + "'");
        out.push_back(v);
    }
    return out;
}

// key = value text, or a flat JSON object with the same keys.
TrainConfig load_train_config(const std::string& path) {
    const auto text = read_text_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') return parse_train_config(text);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("train config: ") + e.what());
    }
    std::ostringstream kv;
    for (const auto& [k, v] : doc.items()) {
        if (v.is_boolean()) kv << k << " = " << (v.get<bool>() ? "true" : "false") << '\n';
        else if (v.is_number()) kv << k << " = " << v.dump() << '\n';
        else throw ParseError("train config: value of '" + k + "' is not a number or boolean");
    }
    return parse_train_config(kv.str());
}

// ---------------------------------------------------------------------------

void cmd_synth(const Globals& g, const std::string& kind_name, std::size_t step, std::size_t samples) {
    const auto kind = experiment_from_string(kind_name);
    const auto seed = derive_seed(g.seed, {static_cast<std::uint64_t>(kind), step, 0});
    RectangleWorld world;
    RuleSet rules;
    if (kind == ExperimentKind::nine_rect) {
        world = nine_rect_world(seed, samples);
        rules = nine_rect_rules();
    } else {
        if (step < 1 || step > kSweepSteps) throw Error("--step must lie in 1.." + std::to_string(kSweepSteps));
        auto [r1, r2] = sweep_geometry(step);
        world = kind == ExperimentKind::hmc_sweep ? hmc_world(r1, r2, seed, samples) : lcmc_world(r1, r2, seed, samples);
        rules = kind == ExperimentKind::hmc_sweep ? hmc_world_rules() : lcmc_world_rules();
    }
    const auto data = gen_rectangles(world);

    std::vector<std::string> header = {"x", "y"};
    for (const auto& n : data.classes.names()) header.push_back(n);
    header.push_back("split");
    std::vector<std::string> split(data.features.rows());
    for (auto i : data.train) split[i] = "train";
    for (auto i : data.val) split[i] = "val";
    for (auto i : data.test) split[i] = "test";
    std::ostringstream csv;
    csv << format_csv_row(header) << '\n';
    for (std::size_t r = 0; r < data.features.rows(); ++r) {
        std::vector<std::string> cells = {num(data.features(r, 0)), num(data.features(r, 1))};
        for (double v : data.labels.row(r)) cells.push_back(v != 0.0 ? "1" : "0");
        cells.push_back(split[r]);
        csv << format_csv_row(cells) << '\n';
    }
    const std::string stem = kind == ExperimentKind::nine_rect ? kind_name : kind_name + "_step" + std::to_string(step);
    json schema = {{"labels", data.classes.names()}, {"split_column", "split"}};
    write_file(out_path(g, stem + ".csv"), csv.str());
    write_file(out_path(g, stem + ".schema.json"), schema.dump(2) + "\n");
    write_file(out_path(g, stem + ".rules"), serialize_rules(rules));
    std::cerr << "wrote " << stem << ".csv, " << stem << ".schema.json, " << stem << ".rules to " << g.out_dir << "\n";
}

struct SweepArgs {
    std::string kind;
    std::size_t runs = 10, epochs = 20000, hidden = 0, samples = 5000, grid = 0;
    double lr = 1e-2;
    std::vector<std::size_t> steps;
    bool quiet = false;
};

void cmd_sweep(const Globals& g, const SweepArgs& a) {
    const auto kind = experiment_from_string(a.kind);
    ExperimentConfig cfg;
    cfg.runs = a.runs;
    cfg.epochs = a.epochs;
    cfg.hidden = a.hidden;
    cfg.learning_rate = a.lr;
    cfg.samples = a.samples;
    cfg.steps = a.steps;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.grid_resolution = a.grid;
    if (!a.quiet) {
        cfg.on_progress = [](std::size_t done, std::size_t total) {
            std::cerr << "\r" << done << "/" << total << " runs" << (done == total ? "\n" : "") << std::flush;
        };
    }
    const auto rep = run_experiment(kind, cfg);
    write_file(out_path(g, a.kind + "_runs.csv"), runs_csv(rep));
    write_file(out_path(g, a.kind + "_summary.csv"), summary_csv(rep));
    for (const auto& grid : rep.grids) {
        std::ostringstream os;
        os << format_csv_row(grid.header) << '\n';
        for (std::size_t r = 0; r < grid.values.rows(); ++r) {
            std::vector<std::string> cells;
            for (double v : grid.values.row(r)) cells.push_back(num(v));
            os << format_csv_row(cells) << '\n';
        }
        write_file(out_path(g, a.kind + "_grid_step" + std::to_string(grid.step) + "_" + grid.system + ".csv"), os.str());
    }
    std::size_t diverged = 0;
    for (const auto& o : rep.runs) diverged += o.diverged ? 1 : 0;
    for (const auto& s : rep.summary) {
        std::fprintf(stderr, "step %zu %-7s au_prc %.4f (%.4f)\n", s.step, s.system.c_str(), s.mean("au_prc"),
                     s.stddev("au_prc"));
    }
    if (diverged) std::cerr << diverged << " run(s) diverged; see " << a.kind << "_runs.csv\n";
}

void cmd_compile(const std::string& rules_path, const std::string& format, const std::string& emit_circuit,
                 const std::string& output) {
    const auto rs = load_rules_file(rules_path);
    const auto strat = comp_strata(rs);
    const auto c = compile(rs);
    const auto& names = rs.classes().names();
    if (format == "json") {
        json doc;
        doc["classes"] = names;
        doc["num_rules"] = rs.size();
        doc["num_strata"] = c.num_strata();
        json strata = json::array();
        for (std::size_t k = 0; k < c.num_strata(); ++k) {
            json s;
            std::vector<std::string> members;
            for (std::size_t i = 0; i < names.size(); ++i)
                if (c.class_stratum()[i] == k + 1) members.push_back(names[i]);
            s["classes"] = members;
            s["source_rules"] = strat.strata_rules[k].size();
            s["closed_rules"] = c.stratum_rules(k).size();
            s["body_matrix"] = {c.stratum_rules(k).size(), names.size()};
            s["head_matrix"] = {names.size(), c.stratum_rules(k).size()};
            strata.push_back(s);
        }
        doc["strata"] = strata;
        doc["hierarchy"] = c.is_hierarchy();
        emit(output, doc.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "classes: " << names.size() << "\nrules: " << rs.size() << "\nstrata: " << c.num_strata()
           << "\nhierarchy: " << (c.is_hierarchy() ? "yes" : "no") << "\n";
        for (std::size_t k = 0; k < c.num_strata(); ++k) {
            os << "stratum " << k + 1 << ": {";
            bool first = true;
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (c.class_stratum()[i] != k + 1) continue;
                os << (first ? "" : ", ") << names[i];
                first = false;
            }
            const auto p = c.stratum_rules(k).size();
            os << "}  rules " << strat.strata_rules[k].size() << " -> closed " << p << "  matrices " << p << "x"
               << names.size() << " body, " << names.size() << "x" << p << " head\n";
        }
        emit(output, os.str());
    }
    if (!emit_circuit.empty()) write_file(emit_circuit, circuit_to_json(c));
}

struct TrainArgs {
    std::string data, schema, rules, config, wrapper = "ccn_closs", hidden = "8", activation = "tanh";
    std::string model_name = "model.ckpt", history_name = "history.csv", features_name = "features.csv";
};

void cmd_train(const Globals& g, const TrainArgs& a) {
    const auto data = load_dataset(a.data, a.schema);
    const auto wrapper = wrapper_from_string(a.wrapper);
    std::shared_ptr<const ConstraintCircuit> circuit;
    if (!a.rules.empty()) {
        circuit = std::make_shared<const ConstraintCircuit>(
            compile(reorder_classes(load_rules_file(a.rules), data.classes.names())));
    } else if (wrapper != Wrapper::raw) {
        throw Error("--rules is required for wrapper " + a.wrapper);
    }
    TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
    cfg.seed = derive_seed(g.seed, {2});
    std::vector<std::size_t> sizes = {data.features.cols()};
    for (auto h : parse_sizes(a.hidden)) sizes.push_back(h);
    sizes.push_back(data.labels.cols());
    const auto init = init_model(sizes, activation_from_string(a.activation), derive_seed(g.seed, {1}));
    const auto res = train(init, data, circuit, wrapper, cfg);
    save_checkpoint(out_path(g, a.model_name).string(), res.system.model, wrapper);
    write_history_csv(out_path(g, a.history_name).string(), res.history);
    // Preprocessed inputs (standardised, one-hot) for `predict --model --features`.
    write_matrix_csv(out_path(g, a.features_name).string(), data.features, data.feature_names);
    if (!data.test.empty()) {
        const auto report = mc_metrics(res.system.infer(data.features_of(data.test)), data.labels_of(data.test));
        std::cout << metric_report_json(report) << "\n";
    }
    std::cerr << "trained " << res.best_epoch << " epochs; wrote " << a.model_name << ", " << a.history_name << " and "
              << a.features_name << " to " << g.out_dir << "\n";
}

struct EvalArgs {
    std::string circuit, scores, model, features, output;
    double threshold = 0.5;
};

void cmd_eval(const EvalArgs& a, bool labels) {
    const auto c = std::make_shared<const ConstraintCircuit>(load_circuit(a.circuit));
    Matrix out;
    if (!a.model.empty()) {
        if (a.features.empty()) throw Error("--model needs --features");
        auto [model, wrapper] = load_checkpoint(a.model);
        const auto sys = wrap_baseline(std::move(model), wrapper, c);
        const auto x = read_matrix_csv(a.features);
        out = sys.infer(x);
    } else {
        if (a.scores.empty()) throw Error("give --scores, or --model with --features");
        out = cm_forward(*c, class_columns(load_csv(a.scores), c->classes(), a.scores));
    }
    if (labels) {
        if (auto w = threshold_warning(*c, a.threshold)) std::cerr << "warning: " << *w << "\n";
    }
    emit(a.output, scores_csv(c->classes(), out, a.threshold, labels));
    const auto bad = count_violating_rows(circuit_rules(*c), out);
    if (bad) throw Violation("self-check failed: " + std::to_string(bad) + " output row(s) violate a constraint");
}

void cmd_check(const std::string& rules_path, const std::string& preds_path, double threshold,
               const std::string& output) {
    const auto rs = load_rules_file(rules_path);
    const auto s = class_columns(load_csv(preds_path), rs.classes(), preds_path);
    std::ostringstream os;
    auto header = std::vector<std::string>{"row", "rule", "kind"};
    for (const auto& n : rs.classes().names()) header.push_back(n);
    os << format_csv_row(header) << '\n';
    std::size_t count = 0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        auto report = [&](std::size_t rule, const char* kind) {
            std::vector<std::string> cells = {std::to_string(r + 1), rs.format_rule(rs.rules()[rule]), kind};
            for (double v : s.row(r)) cells.push_back(num(v));
            os << format_csv_row(cells) << '\n';
            ++count;
        };
        for (auto i : check_constraint_violation(rs, s.row(r))) report(i, "constraint");
        for (auto i : check_logical_violation(rs, ClassSet::from_scores(s.row(r), threshold))) report(i, "logical");
    }
    emit(output, os.str());
    if (count) throw Violation(std::to_string(count) + " violation(s) found");
}

void cmd_metrics(const std::string& scores_path, const std::string& labels_path, double threshold,
                 const std::string& output) {
    // The label file names the classes; the scores file may carry extra columns.
    std::vector<std::string> header;
    const auto y = read_matrix_csv(labels_path, &header);
    const auto s = class_columns(load_csv(scores_path), ClassTable(header), scores_path);
    emit(output, metric_report_json(mc_metrics(s, y, threshold)) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coherent multi-label prediction: rule compilation, constrained training and evaluation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for sweeps")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "Directory for generated files")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Generate a rectangle dataset with its rules and schema");
    std::string synth_kind;
    std::size_t synth_step = 1, synth_samples = 5000;
    synth->add_option("kind", synth_kind, "hmc_sweep, lcmc_sweep or nine_rect")->required();
    synth->add_option("--step", synth_step, "Sweep step 1..9")->capture_default_str();
    synth->add_option("--samples", synth_samples, "Number of points")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Run a synthetic experiment and write run/summary CSVs");
    SweepArgs sa;
    sweep->add_option("kind", sa.kind, "hmc_sweep, lcmc_sweep or nine_rect")->required();
    sweep->add_option("--runs", sa.runs, "Seeds per step and system")->capture_default_str();
    sweep->add_option("--epochs", sa.epochs, "Training epochs")->capture_default_str();
    sweep->add_option("--hidden", sa.hidden, "Hidden units (0: experiment default)")->capture_default_str();
    sweep->add_option("--lr", sa.lr, "Adam learning rate")->capture_default_str();
    sweep->add_option("--samples", sa.samples, "Points per dataset")->capture_default_str();
    sweep->add_option("--steps", sa.steps, "Sweep steps to run (default: all)")->delimiter(',');
    sweep->add_option("--grid", sa.grid, "Decision-grid resolution for run 1 (0: none)")->capture_default_str();
    sweep->add_flag("--quiet", sa.quiet, "No progress output");

    auto* comp = app.add_subcommand("compile", "Stratify and close a rule file; report or emit the circuit");
    std::string comp_rules, comp_format = "text", comp_emit, comp_out;
    comp->add_option("rules", comp_rules, "Rule file")->required()->check(CLI::ExistingFile);
    comp->add_option("--format", comp_format, "Report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    comp->add_option("--emit-circuit", comp_emit, "Write the compiled circuit (JSON) here");
    comp->add_option("-o,--output", comp_out, "Report destination (default stdout)");

    auto* tr = app.add_subcommand("train", "Train a network on a CSV dataset");
    TrainArgs ta;
    tr->add_option("--data", ta.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--schema", ta.schema, "Dataset schema JSON")->required()->check(CLI::ExistingFile);
    tr->add_option("--rules", ta.rules, "Rule or hierarchy file")->check(CLI::ExistingFile);
    tr->add_option("--config", ta.config, "Training config (key = value or JSON)")->check(CLI::ExistingFile);
    tr->add_option("--wrapper", ta.wrapper, "raw, f_plus_min, g_plus_max, h_plus_postproc, h_cm_bce, ccn_closs")
        ->capture_default_str();
    tr->add_option("--hidden", ta.hidden, "Comma-separated hidden layer sizes")->capture_default_str();
    tr->add_option("--activation", ta.activation, "tanh or relu")->capture_default_str();
    tr->add_option("--model-name", ta.model_name, "Checkpoint file name")->capture_default_str();
    tr->add_option("--history-name", ta.history_name, "History CSV file name")->capture_default_str();
    tr->add_option("--features-name", ta.features_name, "Preprocessed feature CSV file name")->capture_default_str();

    EvalArgs ea;
    auto add_eval_opts = [&](CLI::App* cmd) {
        cmd->add_option("--circuit", ea.circuit, "Compiled circuit JSON")->required()->check(CLI::ExistingFile);
        cmd->add_option("--scores", ea.scores, "CSV of raw scores with one column per class")->check(CLI::ExistingFile);
        cmd->add_option("--model", ea.model, "Checkpoint; used with --features instead of --scores")
            ->check(CLI::ExistingFile);
        cmd->add_option("--features", ea.features, "Preprocessed feature CSV for --model (as written by train)")->check(CLI::ExistingFile);
        cmd->add_option("--threshold", ea.threshold, "Decision threshold")->capture_default_str();
        cmd->add_option("-o,--output", ea.output, "Destination (default stdout)");
    };
    auto* ev = app.add_subcommand("eval", "Coherent scores for raw score rows");
    add_eval_opts(ev);
    auto* pr = app.add_subcommand("predict", "Coherent scores plus the predicted label set");
    add_eval_opts(pr);

    auto* chk = app.add_subcommand("check", "Report rule violations in a predictions CSV");
    std::string chk_rules, chk_preds, chk_out;
    double chk_threshold = 0.5;
    chk->add_option("rules", chk_rules, "Rule file")->required()->check(CLI::ExistingFile);
    chk->add_option("predictions", chk_preds, "CSV with one score column per class")->required()->check(CLI::ExistingFile);
    chk->add_option("--threshold", chk_threshold, "Decision threshold")->capture_default_str();
    chk->add_option("-o,--output", chk_out, "Report destination (default stdout)");

    auto* met = app.add_subcommand("metrics", "AU(PRC) and multi-label metrics as JSON");
    std::string met_scores, met_labels, met_out;
    double met_threshold = 0.5;
    met->add_option("scores", met_scores, "Scores CSV with a column per label class")->required()->check(CLI::ExistingFile);
    met->add_option("labels", met_labels, "Labels CSV, one 0/1 column per class")->required()->check(CLI::ExistingFile);
    met->add_option("--threshold", met_threshold, "Decision threshold")->capture_default_str();
    met->add_option("-o,--output", met_out, "Destination (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) cmd_synth(g, synth_kind, synth_step, synth_samples);
        else if (*sweep) cmd_sweep(g, sa);
        else if (*comp) cmd_compile(comp_rules, comp_format, comp_emit, comp_out);
        else if (*tr) cmd_train(g, ta);
        else if (*ev) cmd_eval(ea, false);
        else if (*pr) cmd_eval(ea, true);
        else if (*chk) cmd_check(chk_rules, chk_preds, chk_threshold, chk_out);
        else if (*met) cmd_metrics(met_scores, met_labels, met_threshold, met_out);
    } catch (const NotStratifiedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const SemanticError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const Violation& e) {
        std::cerr << e.what() << "\n";
        return kExitSemantic;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
