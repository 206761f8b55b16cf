#include "coherent/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "coherent/random.hpp"
#include "json.hpp"

namespace coherent {

void TabularDataset::validate() const {
    const auto n = features.rows();
    if (labels.rows() != n) throw DimensionError("feature and label row counts differ");
    if (labels.cols() != classes.size()) throw DimensionError("label width differs from the class count");
    std::vector<int> seen(n, 0);
    for (const auto* split : {&train, &val, &test}) {
        for (auto i : *split) {
            if (i >= n) throw DimensionError("split index out of range");
            if (seen[i]++) throw DimensionError("splits overlap");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw DimensionError("splits do not cover every row");
}

// ---------------------------------------------------------------------------
// Rectangle worlds
// ---------------------------------------------------------------------------

std::vector<double> RectangleWorld::label(double x, double y) const {
    std::vector<double> out(membership.size(), 0.0);
    for (std::size_t c = 0; c < membership.size(); ++c) {
        const auto& m = membership[c];
        const bool in = std::any_of(m.include.begin(), m.include.end(), [&](auto r) { return rects[r].contains(x, y); });
        const bool out_ = std::any_of(m.exclude.begin(), m.exclude.end(), [&](auto r) { return rects[r].contains(x, y); });
        out[c] = in && !out_ ? 1.0 : 0.0;
    }
    return out;
}

TabularDataset gen_rectangles(const RectangleWorld& world) {
    for (const auto& r : world.rects) {
        if (!(r.x1 > r.x0 && r.y1 > r.y0)) throw DimensionError("degenerate rectangle");
    }
    if (world.membership.size() != world.class_names.size()) throw DimensionError("one membership per class expected");
    for (const auto& m : world.membership) {
        for (const auto* v : {&m.include, &m.exclude})
            for (auto r : *v)
                if (r >= world.rects.size()) throw DimensionError("membership refers to a missing rectangle");
    }
    if (!(world.train_fraction >= 0.0 && world.train_fraction <= 1.0)) throw DimensionError("bad train fraction");

    TabularDataset d;
    d.classes = ClassTable(world.class_names);
    d.feature_names = {"x", "y"};
    d.features = Matrix(world.samples, 2);
    d.labels = Matrix(world.samples, world.class_names.size());
    Rng rng(world.seed);
    for (std::size_t n = 0; n < world.samples; ++n) {
        const double x = rng.uniform();
        const double y = rng.uniform();
        d.features(n, 0) = x;
        d.features(n, 1) = y;
        auto lab = world.label(x, y);
        std::copy(lab.begin(), lab.end(), d.labels.row(n).begin());
    }
    const auto n_train = static_cast<std::size_t>(std::llround(world.train_fraction * static_cast<double>(world.samples)));
    for (std::size_t n = 0; n < world.samples; ++n) (n < n_train ? d.train : d.test).push_back(n);
    return d;
}

RectangleWorld hmc_world(const Rect& r1, const Rect& r2, std::uint64_t seed, std::size_t samples) {
    RectangleWorld w;
    w.rects = {r1, r2};
    w.class_names = {"A1", "A"};
    w.membership = {{{0}, {}}, {{0, 1}, {}}};
    w.samples = samples;
    w.seed = seed;
    return w;
}

RectangleWorld lcmc_world(const Rect& r1, const Rect& r2, std::uint64_t seed, std::size_t samples) {
    RectangleWorld w;
    w.rects = {r1, r2};
    w.class_names = {"A1", "A2", "A"};
    w.membership = {{{0}, {}}, {{1}, {0}}, {{0, 1}, {}}};
    w.samples = samples;
    w.seed = seed;
    return w;
}

RuleSet hmc_world_rules() { return parse_rules("class: A1, A\nA1 -> A\n"); }

RuleSet lcmc_world_rules() { return parse_rules("class: A1, A2, A\nA1 -> A\nA2 -> A\nA, !A1 -> A2\n"); }

std::pair<Rect, Rect> sweep_geometry(std::size_t step) {
    if (step < 1 || step > kSweepSteps) throw DimensionError("sweep step must be in 1..9");
    const double cx = 0.1 + static_cast<double>(step - 1) * (0.5 / static_cast<double>(kSweepSteps - 1));
    const Rect r1{cx - 0.1, 0.5, cx + 0.1, 0.7};
    const Rect r2{0.3, 0.3, 0.9, 0.9};
    return {r1, r2};
}

RectangleWorld nine_rect_world(std::uint64_t seed, std::size_t samples) {
    RectangleWorld w;
    w.rects = {
        {0.10, 0.10, 0.55, 0.90},  // R1
        {0.20, 0.45, 0.55, 0.80},  // R2
        {0.46, 0.46, 0.54, 0.54},  // R3
        {0.10, 0.45, 0.90, 0.90},  // R4
        {0.05, 0.05, 0.95, 0.95},  // R5
        {0.45, 0.45, 0.80, 0.80},  // R6
        {0.10, 0.10, 0.90, 0.55},  // R7
        {0.45, 0.20, 0.80, 0.55},  // R8
        {0.45, 0.10, 0.90, 0.90},  // R9
    };
    for (std::size_t i = 0; i < 9; ++i) {
        w.class_names.push_back("A" + std::to_string(i + 1));
        w.membership.push_back({{i}, {}});
    }
    w.samples = samples;
    w.seed = seed;
    return w;
}

RuleSet nine_rect_rules() {
    static constexpr std::string_view kEdges =
        "A1 < A5\nA4 < A5\nA7 < A5\nA9 < A5\n"
        "A2 < A1\nA2 < A4\nA6 < A4\nA6 < A9\nA8 < A7\nA8 < A9\n"
        "A3 < A2\nA3 < A6\nA3 < A8\n";
    // Fix the class order to A1..A9 regardless of edge order.
    auto rs = hierarchy_to_rules(parse_hierarchy(kEdges));
    ClassTable table;
    for (int i = 1; i <= 9; ++i) table.intern("A" + std::to_string(i));
    RuleSet out(table);
    for (const auto& r : rs.rules()) {
        out.add(Rule(table.at(rs.classes().name(r.head)), {table.at(rs.classes().name(r.body_pos.front()))}));
    }
    return out;
}

SyntheticProblem gen_nine_rect(std::uint64_t seed, std::size_t samples) {
    return {gen_rectangles(nine_rect_world(seed, samples)), nine_rect_rules()};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string cell;
    bool quoted = false, any = false;
    std::size_t line = 1;
    auto end_cell = [&] {
        rec.push_back(std::move(cell));
        cell.clear();
    };
    auto end_record = [&] {
        end_cell();
        if (!(rec.size() == 1 && rec[0].empty())) records.push_back(std::move(rec));
        rec.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        any = true;
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                cell += ch;
            }
            continue;
        }
        if (ch == '"' && cell.empty()) {
            quoted = true;
        } else if (ch == ',') {
            end_cell();
        } else if (ch == '\n') {
            end_record();
            ++line;
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line);
    if (any && (!cell.empty() || !rec.empty())) end_record();
    if (records.empty()) throw ParseError("CSV has no header");

    CsvTable t;
    t.header = std::move(records.front());
    for (auto& h : t.header) {
        auto b = h.find_first_not_of(" \t");
        auto e = h.find_last_not_of(" \t");
        h = b == std::string::npos ? std::string() : h.substr(b, e - b + 1);
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size()) {
            throw ParseError("row has " + std::to_string(records[r].size()) + " fields, header has " +
                                 std::to_string(t.header.size()),
                             r + 1);
        }
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

std::string format_csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        const auto& c = cells[i];
        if (c.find_first_of(",\"\n") != std::string::npos) {
            out += '"';
            for (char ch : c) {
                if (ch == '"') out += '"';
                out += ch;
            }
            out += '"';
        } else {
            out += c;
        }
    }
    return out;
}

namespace {

bool parse_double(const std::string& s, double& out) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return false;
    auto e = s.find_last_not_of(" \t");
    const char* first = s.data() + b;
    const char* last = s.data() + e + 1;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool is_missing(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return true;
    auto v = s.substr(b, s.find_last_not_of(" \t") - b + 1);
    return v == "?" || v == "NA" || v == "NaN" || v == "nan";
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

DatasetSchema DatasetSchema::from_json(std::string_view text) {
    DatasetSchema s;
    try {
        auto doc = nlohmann::json::parse(text);
        s.labels = doc.at("labels").get<std::vector<std::string>>();
        if (doc.contains("categorical")) s.categorical = doc["categorical"].get<std::vector<std::string>>();
        if (doc.contains("ignore")) s.ignore = doc["ignore"].get<std::vector<std::string>>();
        if (doc.contains("split_column")) s.split_column = doc["split_column"].get<std::string>();
        if (doc.contains("val_fraction")) s.val_fraction = doc["val_fraction"].get<double>();
        if (doc.contains("test_fraction")) s.test_fraction = doc["test_fraction"].get<double>();
        if (doc.contains("seed")) s.seed = doc["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("dataset schema: ") + e.what());
    }
    if (s.labels.empty()) throw ParseError("dataset schema: no label columns");
    return s;
}

TabularDataset load_dataset(const CsvTable& csv, const DatasetSchema& schema) {
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < csv.header.size(); ++i) {
        if (!col.emplace(csv.header[i], i).second) throw ParseError("duplicate column '" + csv.header[i] + "'");
    }
    auto need = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw ParseError("missing column '" + name + "'");
        return it->second;
    };

    const std::size_t N = csv.rows.size();
    TabularDataset d;
    d.classes = ClassTable(schema.labels);
    d.labels = Matrix(N, schema.labels.size());
    std::set<std::size_t> used;
    for (std::size_t c = 0; c < schema.labels.size(); ++c) {
        const auto j = need(schema.labels[c]);
        used.insert(j);
        for (std::size_t n = 0; n < N; ++n) {
            const auto v = trimmed(csv.rows[n][j]);
            if (v != "0" && v != "1") {
                throw ParseError("label column '" + schema.labels[c] + "' has non-binary value '" + v + "'", n + 2);
            }
            d.labels(n, c) = v == "1" ? 1.0 : 0.0;
        }
    }
    for (const auto& name : schema.ignore) used.insert(need(name));

    // Splits.
    if (!schema.split_column.empty()) {
        const auto j = need(schema.split_column);
        used.insert(j);
        for (std::size_t n = 0; n < N; ++n) {
            const auto v = trimmed(csv.rows[n][j]);
            if (v == "train") d.train.push_back(n);
            else if (v == "val" || v == "valid" || v == "validation") d.val.push_back(n);
            else if (v == "test") d.test.push_back(n);
            else throw ParseError("split column value '" + v + "' is not train/val/test", n + 2);
        }
    } else {
        if (schema.val_fraction < 0 || schema.test_fraction < 0 || schema.val_fraction + schema.test_fraction >= 1.0) {
            throw ParseError("dataset schema: split fractions must be non-negative and sum below 1");
        }
        std::vector<std::size_t> perm(N);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(schema.seed);
        rng.shuffle(perm.begin(), perm.end());
        const auto n_test = static_cast<std::size_t>(std::llround(schema.test_fraction * static_cast<double>(N)));
        const auto n_val = static_cast<std::size_t>(std::llround(schema.val_fraction * static_cast<double>(N)));
        for (std::size_t i = 0; i < N; ++i) {
            (i < n_test ? d.test : i < n_test + n_val ? d.val : d.train).push_back(perm[i]);
        }
        for (auto* s : {&d.train, &d.val, &d.test}) std::sort(s->begin(), s->end());
    }
    if (d.train.empty()) throw ParseError("training split is empty");

    // Feature columns in file order.
    std::set<std::size_t> categorical;
    for (const auto& name : schema.categorical) categorical.insert(need(name));
    struct Block {
        std::size_t column;
        std::vector<std::string> levels;  // empty for numeric
    };
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
        if (used.count(j)) continue;
        Block b{j, {}};
        if (categorical.count(j)) {
            std::set<std::string> levels;
            for (const auto& row : csv.rows)
                if (!is_missing(row[j])) levels.insert(trimmed(row[j]));
            b.levels.assign(levels.begin(), levels.end());
            for (const auto& l : b.levels) d.feature_names.push_back(csv.header[j] + "=" + l);
        } else {
            d.feature_names.push_back(csv.header[j]);
        }
        blocks.push_back(std::move(b));
    }

    d.features = Matrix(N, d.feature_names.size());
    std::size_t out_col = 0;
    for (const auto& b : blocks) {
        if (!b.levels.empty()) {
            for (std::size_t n = 0; n < N; ++n) {
                const auto& cell = csv.rows[n][b.column];
                if (is_missing(cell)) continue;
                auto it = std::lower_bound(b.levels.begin(), b.levels.end(), trimmed(cell));
                d.features(n, out_col + static_cast<std::size_t>(it - b.levels.begin())) = 1.0;
            }
            out_col += b.levels.size();
            continue;
        }
        std::vector<double> values(N, std::nan(""));
        for (std::size_t n = 0; n < N; ++n) {
            const auto& cell = csv.rows[n][b.column];
            if (is_missing(cell)) continue;
            if (!parse_double(cell, values[n])) {
                throw ParseError("column '" + csv.header[b.column] + "' has non-numeric value '" + cell + "'", n + 2);
            }
        }
        double sum = 0.0;
        std::size_t cnt = 0;
        for (auto n : d.train)
            if (!std::isnan(values[n])) sum += values[n], ++cnt;
        const double mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
        for (auto& v : values)
            if (std::isnan(v)) v = mean;
        double ss = 0.0;
        for (auto n : d.train) ss += (values[n] - mean) * (values[n] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(d.train.size()));
        for (std::size_t n = 0; n < N; ++n) d.features(n, out_col) = sd > 0.0 ? (values[n] - mean) / sd : values[n] - mean;
        ++out_col;
    }
    d.validate();
    return d;
}

TabularDataset load_dataset(const std::string& csv_path, const std::string& schema_path) {
    return load_dataset(parse_csv(read_text_file(csv_path)), DatasetSchema::from_json(read_text_file(schema_path)));
}

Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
    auto t = parse_csv(read_text_file(path));
    Matrix m(t.rows.size(), t.header.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (!parse_double(t.rows[r][c], m(r, c))) {
                throw ParseError(path + ": non-numeric value '" + t.rows[r][c] + "'", r + 2, c + 1);
            }
        }
    }
    if (header) *header = t.header;
    return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header) {
    if (header.size() != m.cols()) throw DimensionError("CSV header width differs from matrix width");
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << format_csv_row(header) << "\n";
    char buf[32];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, m(r, c));
            if (c) out << ',';
            out.write(buf, p - buf);
        }
        out << "\n";
    }
}

}  // namespace coherent
