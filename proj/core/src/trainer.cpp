#include "coherent/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "coherent/constraint_loss.hpp"
#include "coherent/constraint_module.hpp"
#include "coherent/metrics.hpp"

namespace coherent {

namespace {

constexpr std::pair<Wrapper, const char*> kWrapperNames[] = {
    {Wrapper::raw, "raw"},
    {Wrapper::f_plus_min, "f_plus_min"},
    {Wrapper::g_plus_max, "g_plus_max"},
    {Wrapper::h_plus_postproc, "h_plus_postproc"},
    {Wrapper::h_cm_bce, "h_cm_bce"},
    {Wrapper::ccn_closs, "ccn_closs"},
};

}  // namespace

std::string to_string(Wrapper w) {
    for (auto [k, name] : kWrapperNames)
        if (k == w) return name;
    return "unknown";
}

Wrapper wrapper_from_string(const std::string& s) {
    for (auto [k, name] : kWrapperNames)
        if (s == name) return k;
    throw Error("unknown wrapper '" + s + "'");
}

bool wrapper_needs_hierarchy(Wrapper w) { return w == Wrapper::f_plus_min || w == Wrapper::g_plus_max; }

TrainConfig parse_train_config(std::string_view text, TrainConfig cfg) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = std::string(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        const auto key = trim(line.substr(0, eq));
        const auto val = trim(line.substr(eq + 1));
        try {
            std::size_t used = 0;
            auto num = [&] {
                double v = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
                return v;
            };
            auto count = [&] {
                auto v = std::stoull(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
                return static_cast<std::size_t>(v);
            };
            if (key == "epochs") cfg.epochs = count();
            else if (key == "learning_rate") cfg.adam.learning_rate = num();
            else if (key == "beta1") cfg.adam.beta1 = num();
            else if (key == "beta2") cfg.adam.beta2 = num();
            else if (key == "eps") cfg.adam.eps = num();
            else if (key == "weight_decay") cfg.adam.weight_decay = num();
            else if (key == "dropout") cfg.dropout = num();
            else if (key == "batch_size") cfg.batch_size = count();
            else if (key == "patience") cfg.patience = count();
            else if (key == "seed") cfg.seed = count();
            else if (key == "retrain_on_train_val") {
                if (val != "true" && val != "false") throw std::invalid_argument(val);
                cfg.retrain_on_train_val = val == "true";
            } else {
                throw ParseError("unknown config key '" + key + "'", line_no);
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value '" + val + "' for '" + key + "'", line_no);
        } catch (const std::out_of_range&) {
            throw ParseError("value out of range for '" + key + "'", line_no);
        }
    }
    return cfg;
}

Matrix exclusive_labels(const Matrix& mask, const Matrix& y) {
    const auto L = mask.rows();
    if (y.cols() != L) throw DimensionError("label width differs from mask size");
    Matrix out = y;
    for (std::size_t n = 0; n < y.rows(); ++n) {
        for (std::size_t a = 0; a < L; ++a) {
            if (y(n, a) == 0.0) continue;
            for (std::size_t b = 0; b < L; ++b) {
                if (b != a && mask(a, b) != 0.0 && y(n, b) != 0.0) {
                    out(n, a) = 0.0;
                    break;
                }
            }
        }
    }
    return out;
}

Matrix apply_wrapper(Wrapper w, const ConstraintCircuit* c, const Matrix& h) {
    if (w == Wrapper::raw) return h;
    if (!c) throw SemanticError("wrapper " + to_string(w) + " needs a constraint circuit");
    switch (w) {
        case Wrapper::f_plus_min: {
            const auto& mask = c->descendant_mask();
            const auto L = mask.rows();
            Matrix out(h.rows(), L);
            for (std::size_t n = 0; n < h.rows(); ++n) {
                for (std::size_t a = 0; a < L; ++a) {
                    double m = h(n, a);
                    for (std::size_t b = 0; b < L; ++b)
                        if (mask(b, a) != 0.0) m = std::min(m, h(n, b));
                    out(n, a) = m;
                }
            }
            return out;
        }
        case Wrapper::g_plus_max:
            return cm_forward_hmc(c->descendant_mask(), h);
        default:
            return cm_forward(*c, h);
    }
}

Matrix TrainedSystem::scores(const Matrix& x) const { return forward(model, x); }

Matrix TrainedSystem::infer(const Matrix& x) const { return apply_wrapper(wrapper, circuit.get(), scores(x)); }

TrainedSystem wrap_baseline(MlpModel model, Wrapper kind, std::shared_ptr<const ConstraintCircuit> circuit) {
    if (kind != Wrapper::raw) {
        if (!circuit) throw SemanticError("wrapper " + to_string(kind) + " needs a constraint circuit");
        if (circuit->num_classes() != model.output_dim()) {
            throw DimensionError("model output width differs from the circuit's class count");
        }
        if (wrapper_needs_hierarchy(kind) && !circuit->is_hierarchy()) {
            throw SemanticError("wrapper " + to_string(kind) + " needs rules that form a class hierarchy");
        }
    }
    return TrainedSystem{std::move(model), kind, std::move(circuit)};
}

WrappedLoss wrapper_loss(Wrapper w, const ConstraintCircuit* c, const Matrix& h, const Matrix& y) {
    BatchLossResult r;
    switch (w) {
        case Wrapper::raw:
        case Wrapper::f_plus_min:
        case Wrapper::h_plus_postproc:
            r = bce_loss(h, y);
            break;
        case Wrapper::g_plus_max:
            r = bce_loss(h, exclusive_labels(c->descendant_mask(), y));
            break;
        case Wrapper::h_cm_bce:
            r = cm_bce_loss(*c, h, y);
            break;
        case Wrapper::ccn_closs:
            r = closs(*c, h, y);
            break;
    }
    const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(1, h.rows() * h.cols()));
    for (auto& g : r.gradient.data()) g *= scale;
    return {r.loss * scale, std::move(r.gradient)};
}

namespace {

// Trains for up to `epochs` epochs on (x, y); evaluates validation AU(PRC)
// when `xv` is given and stops after `patience` epochs without improvement.
TrainResult run(const MlpModel& init, const Matrix& x, const Matrix& y, const Matrix* xv, const Matrix* yv,
                std::shared_ptr<const ConstraintCircuit> circuit, Wrapper wrapper, const TrainConfig& cfg,
                std::size_t epochs, std::size_t patience) {
    TrainResult res;
    res.system = wrap_baseline(init, wrapper, circuit);
    MlpModel& model = res.system.model;
    const ConstraintCircuit* c = circuit.get();

    Adam opt(model, cfg.adam);
    Gradients grads(model);
    Rng rng(cfg.seed);
    ForwardCache cache;
    const std::size_t N = x.rows();
    const std::size_t bs = cfg.batch_size == 0 ? N : std::min(cfg.batch_size, N);
    // g_plus_max trains plain BCE against fixed exclusive labels.
    const bool exclusive = wrapper == Wrapper::g_plus_max;
    const Matrix y_excl = exclusive ? exclusive_labels(c->descendant_mask(), y) : Matrix{};
    const Matrix& y_fit = exclusive ? y_excl : y;
    const Wrapper loss_kind = exclusive ? Wrapper::raw : wrapper;
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});

    MlpModel best = model;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        if (bs < N) rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < N; start += bs) {
            const std::size_t end = std::min(N, start + bs);
            const bool whole = start == 0 && end == N && bs == N;
            Matrix xb, yb;
            if (!whole) {
                std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                             order.begin() + static_cast<std::ptrdiff_t>(end));
                xb = x.select_rows(idx);
                yb = y_fit.select_rows(idx);
            }
            const Matrix& xr = whole ? x : xb;
            const Matrix& yr = whole ? y_fit : yb;
            const Matrix h = forward(model, xr, &cache, cfg.dropout, cfg.dropout > 0.0 ? &rng : nullptr);
            bool finite = true;
            for (double v : h.data()) finite = finite && std::isfinite(v);
            if (!finite) throw TrainingDivergedError("non-finite network output at epoch " + std::to_string(epoch), epoch);
            auto wl = wrapper_loss(loss_kind, c, h, yr);
            if (!std::isfinite(wl.loss)) {
                throw TrainingDivergedError("loss became " + std::to_string(wl.loss) + " at epoch " + std::to_string(epoch),
                                            epoch);
            }
            loss_sum += wl.loss * static_cast<double>(end - start);
            grads.zero();
            backward(model, cache, wl.gradient, grads);
            opt.step(model, grads);
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(N), std::numeric_limits<double>::quiet_NaN()};
        if (cfg.on_epoch) cfg.on_epoch(epoch, rec.train_loss);
        if (xv) {
            rec.val_au_prc = au_prc(res.system.infer(*xv), *yv);
            if (rec.val_au_prc > best_score) {
                best_score = rec.val_au_prc;
                best = model;
                res.best_epoch = epoch;
                since_best = 0;
            } else if (patience > 0 && ++since_best >= patience) {
                res.history.push_back(rec);
                break;
            }
        } else {
            res.best_epoch = epoch;
        }
        res.history.push_back(rec);
    }
    if (xv && res.best_epoch > 0) model = best;
    return res;
}

}  // namespace

TrainResult train(const MlpModel& model, const TabularDataset& data, std::shared_ptr<const ConstraintCircuit> circuit,
                  Wrapper wrapper, const TrainConfig& cfg) {
    if (data.train.empty()) throw DimensionError("empty training split");
    if (model.input_dim() != data.features.cols()) throw DimensionError("model input width differs from feature count");
    if (model.output_dim() != data.labels.cols()) throw DimensionError("model output width differs from label count");
    const Matrix x = data.features_of(data.train);
    const Matrix y = data.labels_of(data.train);

    if (cfg.patience == 0 || data.val.empty()) {
        return run(model, x, y, nullptr, nullptr, circuit, wrapper, cfg, cfg.epochs, 0);
    }
    const Matrix xv = data.features_of(data.val);
    const Matrix yv = data.labels_of(data.val);
    auto first = run(model, x, y, &xv, &yv, circuit, wrapper, cfg, cfg.epochs, cfg.patience);
    if (!cfg.retrain_on_train_val) return first;

    std::vector<std::size_t> all = data.train;
    all.insert(all.end(), data.val.begin(), data.val.end());
    auto second = run(model, data.features_of(all), data.labels_of(all), nullptr, nullptr, circuit, wrapper, cfg,
                      first.best_epoch, 0);
    second.history.insert(second.history.begin(), first.history.begin(), first.history.end());
    second.best_epoch = first.best_epoch;
    return second;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'C', 'O', 'H', 'R', 'N', 'T', '\0', '\1'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}
std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError("checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const MlpModel& m, Wrapper w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(m.activation));
    put_u32(out, static_cast<std::uint32_t>(w));
    put_u32(out, static_cast<std::uint32_t>(m.sizes.size()));
    for (auto s : m.sizes) put_u64(out, s);
    for (const auto& l : m.layers) {
        for (double v : l.w) put_u64(out, std::bit_cast<std::uint64_t>(v));
        for (double v : l.b) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) throw Error("write to '" + path + "' failed");
}

std::pair<MlpModel, Wrapper> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ParseError(path + ": not a checkpoint file");
    const auto version = get_u32(in);
    if (version != kVersion) throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
    const auto act = get_u32(in);
    const auto wrap = get_u32(in);
    if (act > 1 || wrap > static_cast<std::uint32_t>(Wrapper::ccn_closs)) throw ParseError(path + ": corrupt header");
    const auto nsizes = get_u32(in);
    if (nsizes < 2 || nsizes > 64) throw ParseError(path + ": corrupt layer count");
    std::vector<std::size_t> sizes;
    for (std::uint32_t i = 0; i < nsizes; ++i) {
        const auto s = get_u64(in);
        if (s == 0 || s > (1u << 24)) throw ParseError(path + ": corrupt layer size");
        sizes.push_back(static_cast<std::size_t>(s));
    }
    MlpModel m = init_model(sizes, static_cast<Activation>(act), 0);
    for (auto& l : m.layers) {
        for (auto& v : l.w) v = std::bit_cast<double>(get_u64(in));
        for (auto& v : l.b) v = std::bit_cast<double>(get_u64(in));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path + ": trailing bytes after weights");
    return {std::move(m), static_cast<Wrapper>(wrap)};
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "epoch,train_loss,val_au_prc\n";
    out.precision(17);
    for (const auto& r : history) {
        out << r.epoch << ',' << r.train_loss << ',';
        if (!std::isnan(r.val_au_prc)) out << r.val_au_prc;
        out << '\n';
    }
}

}  // namespace coherent
