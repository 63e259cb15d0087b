#include "ttrp/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "ttrp/datasets.hpp"
#include "ttrp/errors.hpp"
#include "ttrp/experiments.hpp"
#include "ttrp/projections.hpp"

namespace ttrp::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 20240101;

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

std::string shape_text(const std::optional<TensorShape>& s) { return s ? s->to_string() : std::string{}; }

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != width_) throw InvariantError("CSV row width differs from header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::size_t width_;
    std::ostringstream out_;
};

std::string num(double v) { return format_number(v); }
std::string num(Index v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Config helpers
// ---------------------------------------------------------------------------

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const Json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

Index positive(const Json& obj, const std::string& key, Index fallback) {
    const auto v = get_or<Index>(obj, key, fallback);
    if (v < 1) throw ConfigError("field '" + key + "' must be positive");
    return v;
}

Json int_list(const Json& obj, const std::string& key, const Json& fallback) {
    Json v = obj.contains(key) ? obj.at(key) : fallback;
    if (v.is_number_integer()) v = Json::array({v});
    if (!v.is_array() || v.empty()) throw ConfigError("field '" + key + "' must be a non-empty list");
    for (const auto& e : v)
        if (!e.is_number_integer() || e.get<Index>() < 1)
            throw ConfigError("field '" + key + "' must hold positive integers");
    return v;
}

TensorShape shape_of(const Json& modes) {
    if (!modes.is_array() || modes.empty()) throw ConfigError("a shape must be a non-empty list");
    std::vector<Index> out;
    for (const auto& m : modes) {
        if (!m.is_number_integer()) throw ConfigError("shape entries must be integers");
        out.push_back(m.get<Index>());
    }
    try {
        return TensorShape(std::move(out));
    } catch (const ShapeError& e) {
        throw ConfigError(e.what());
    }
}

TensorShape row_shape_of(const Json& modes, Index M) {
    if (!modes.is_array() || modes.empty()) throw ConfigError("row shape must be a non-empty list");
    std::vector<Index> out;
    for (const auto& m : modes) out.push_back(eval_mode(m, M));
    try {
        return TensorShape(std::move(out));
    } catch (const ShapeError& e) {
        throw ConfigError(e.what());
    }
}

Json resolve_dataset(const Json& raw, const Json& fallback, std::uint64_t seed) {
    Json src = raw.is_null() ? fallback : raw;
    reject_unknown(src, {"source", "n0", "N", "path", "seed"}, "dataset");
    const auto source = get_or<std::string>(src, "source", "gaussian");
    Json out;
    out["source"] = source;
    if (source == "gaussian") {
        out["n0"] = positive(src, "n0", 10);
        out["N"] = positive(src, "N", 1000);
    } else if (source == "mnist") {
        if (!src.contains("path")) throw ConfigError("mnist dataset needs a 'path'");
        out["path"] = get_or<std::string>(src, "path", "");
        out["n0"] = positive(src, "n0", 50);
    } else {
        throw ConfigError("unknown dataset source '" + source + "'");
    }
    out["seed"] = get_or<std::uint64_t>(src, "seed", seed);
    return out;
}

Dataset load_dataset(const Json& ds) {
    const StreamKey key{ds.at("seed").get<std::uint64_t>(), {0}};
    if (ds.at("source") == "gaussian") return synth_gaussian(ds.at("n0").get<Index>(), ds.at("N").get<Index>(), key);
    return load_mnist_idx(ds.at("path").get<std::string>(), ds.at("n0").get<Index>(), key);
}

StreamKey projector_key(std::uint64_t seed) { return StreamKey{seed, {1}}; }

Json resolve_experiment(const Json& raw) {
    reject_unknown(raw, {"method", "M", "m", "n", "rank", "distribution", "core_sparsity", "s"}, "experiment");
    if (!raw.contains("method")) throw ConfigError("experiment needs a 'method'");
    const Method method = parse_method(raw.at("method").get<std::string>());
    Json out;
    out["method"] = to_string(method);
    out["M"] = int_list(raw, "M", Json::array({24}));
    switch (method) {
    case Method::TTRP:
    case Method::GaussianTT: {
        if (!raw.contains("m") || !raw.contains("n")) throw ConfigError("TT methods need 'm' and 'n'");
        out["m"] = raw.at("m");
        out["n"] = raw.at("n");
        shape_of(out["n"]);
        for (const auto& M : out["M"]) row_shape_of(out["m"], M.get<Index>());
        out["rank"] = positive(raw, "rank", 1);
        const auto fallback = method == Method::GaussianTT ? "gaussian" : "rademacher";
        out["distribution"] = to_string(parse_distribution(get_or<std::string>(raw, "distribution", fallback)));
        out["core_sparsity"] = get_or<double>(raw, "core_sparsity", 3.0);
        break;
    }
    case Method::GaussianRP: break;
    case Method::SparseRP: {
        const Json s = raw.contains("s") ? raw.at("s") : Json("sqrtN");
        if (!(s.is_number() || s == "sqrtN")) throw ConfigError("'s' must be a number or \"sqrtN\"");
        out["s"] = s;
        break;
    }
    case Method::GaussianTRP:
        if (!raw.contains("n")) throw ConfigError("GaussianTRP needs 'n'");
        out["n"] = raw.at("n");
        shape_of(out["n"]);
        break;
    }
    return out;
}

ProjectionSpec spec_for(const Json& exp, Index M, Index N, const StreamKey& key) {
    const Method method = parse_method(exp.at("method").get<std::string>());
    ProjectionSpec spec;
    switch (method) {
    case Method::TTRP:
    case Method::GaussianTT:
        spec = ProjectionSpec::ttrp(row_shape_of(exp.at("m"), M), shape_of(exp.at("n")), key,
                                    exp.at("rank").get<Index>(),
                                    parse_distribution(exp.at("distribution").get<std::string>()),
                                    exp.at("core_sparsity").get<double>());
        spec.method = method;
        break;
    case Method::GaussianRP: spec = ProjectionSpec::gaussian_rp(M, N, key); break;
    case Method::SparseRP: {
        const Json& s = exp.at("s");
        spec = s.is_number() ? ProjectionSpec::sparse_rp(M, N, s.get<double>(), key)
                             : ProjectionSpec::very_sparse_rp(M, N, key);
        break;
    }
    case Method::GaussianTRP: spec = ProjectionSpec::gaussian_trp(shape_of(exp.at("n")), M, key); break;
    }
    if (spec.N != N)
        throw ConfigError(to_string(method) + " shape " + shape_text(spec.col_shape) + " does not factor N = " +
                          std::to_string(N));
    if (spec.M != M) throw ConfigError(to_string(method) + " row shape does not factor M = " + std::to_string(M));
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

std::string rank_text(const ProjectionSpec& s) { return s.is_tensor_train() ? std::to_string(s.rank) : ""; }

Json default_table_experiments() {
    return Json::parse(R"([
        {"method": "GaussianRP", "M": [24]},
        {"method": "SparseRP", "M": [24], "s": "sqrtN"},
        {"method": "TTRP", "M": [24], "m": [6, 4], "n": [100, 100]},
        {"method": "TTRP", "M": [24], "m": [4, 3, 2], "n": [25, 20, 20]},
        {"method": "TTRP", "M": [24], "m": [3, 2, 2, 2], "n": [10, 10, 10, 10]},
        {"method": "GaussianTRP", "M": [24], "n": [100, 100]},
        {"method": "GaussianTRP", "M": [24], "n": [25, 20, 20]},
        {"method": "GaussianTRP", "M": [24], "n": [10, 10, 10, 10]}
    ])");
}

// ---------------------------------------------------------------------------
// Resolution per command
// ---------------------------------------------------------------------------

std::uint64_t resolved_seed(const Json& raw, const Overrides& ov) {
    return ov.seed ? *ov.seed : get_or<std::uint64_t>(raw, "seed", kDefaultSeed);
}

Json resolve_ratio(const Json& raw, const Overrides& ov) {
    reject_unknown(raw, {"seed", "reps", "threads", "exclusion_threshold", "dataset", "experiments"}, "ratio config");
    Json out;
    const auto seed = resolved_seed(raw, ov);
    out["seed"] = seed;
    out["reps"] = ov.reps ? *ov.reps : positive(raw, "reps", 100);
    if (out["reps"].get<Index>() < 1) throw ConfigError("reps must be positive");
    out["threads"] = ov.threads ? *ov.threads : get_or<unsigned>(raw, "threads", 1);
    out["exclusion_threshold"] = get_or<double>(raw, "exclusion_threshold", kPairExclusionThreshold);
    out["dataset"] = resolve_dataset(raw.value("dataset", Json()), Json{{"source", "gaussian"}, {"n0", 10}, {"N", 10000}},
                                     seed);
    const Json exps = raw.contains("experiments") ? raw.at("experiments") : default_table_experiments();
    if (!exps.is_array() || exps.empty()) throw ConfigError("'experiments' must be a non-empty list");
    out["experiments"] = Json::array();
    for (const auto& e : exps) out["experiments"].push_back(resolve_experiment(e));
    return out;
}

Json resolve_rank_sweep(const Json& raw, const Overrides& ov) {
    reject_unknown(raw, {"seed", "reps", "threads", "exclusion_threshold", "dataset", "M", "m", "n", "ranks", "methods"},
                   "rank-sweep config");
    Json out;
    const auto seed = resolved_seed(raw, ov);
    out["seed"] = seed;
    out["reps"] = ov.reps ? *ov.reps : positive(raw, "reps", 100);
    if (out["reps"].get<Index>() < 1) throw ConfigError("reps must be positive");
    out["threads"] = ov.threads ? *ov.threads : get_or<unsigned>(raw, "threads", 1);
    out["exclusion_threshold"] = get_or<double>(raw, "exclusion_threshold", kPairExclusionThreshold);
    out["dataset"] = resolve_dataset(raw.value("dataset", Json()), Json{{"source", "gaussian"}, {"n0", 10}, {"N", 1000}},
                                     seed);
    out["M"] = positive(raw, "M", 24);
    out["m"] = raw.contains("m") ? raw.at("m") : Json::array({4, 3, 2});
    out["n"] = int_list(raw, "n", Json::array({10, 10, 10}));
    row_shape_of(out["m"], out["M"].get<Index>());
    out["ranks"] = int_list(raw, "ranks", Json::array({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
    const Json methods = raw.contains("methods") ? raw.at("methods") : Json::array({"TTRP", "GaussianTT"});
    if (!methods.is_array() || methods.empty()) throw ConfigError("'methods' must be a non-empty list");
    out["methods"] = Json::array();
    for (const auto& m : methods) {
        const Method method = parse_method(m.get<std::string>());
        if (method != Method::TTRP && method != Method::GaussianTT)
            throw ConfigError("rank-sweep supports TTRP and GaussianTT only");
        out["methods"].push_back(to_string(method));
    }
    return out;
}

Json resolve_timing(const Json& raw, const Overrides& ov) {
    reject_unknown(raw, {"seed", "reps", "M", "m", "cases", "methods", "method_reps", "warmup", "threads"},
                   "timing config");
    Json out;
    out["seed"] = resolved_seed(raw, ov);
    out["reps"] = ov.reps ? *ov.reps : positive(raw, "reps", 100);
    out["M"] = positive(raw, "M", 1000);
    out["m"] = int_list(raw, "m", Json::array({10, 10, 10}));
    if (shape_of(out["m"]).total() != out["M"].get<Index>()) throw ConfigError("timing 'm' does not factor M");
    Json cases = Json::array();
    if (raw.contains("cases")) {
        if (!raw.at("cases").is_array() || raw.at("cases").empty()) throw ConfigError("'cases' must be a non-empty list");
        for (const auto& c : raw.at("cases")) {
            reject_unknown(c, {"N", "n"}, "timing case");
            Json rc{{"N", positive(c, "N", 1)}, {"n", int_list(c, "n", Json())}};
            if (shape_of(rc["n"]).total() != rc["N"].get<Index>()) throw ConfigError("timing case 'n' does not factor N");
            cases.push_back(rc);
        }
    } else {
        for (const auto& c : default_timing_cases()) cases.push_back(Json{{"N", c.N}, {"n", c.col_shape.modes()}});
    }
    out["cases"] = cases;
    const Json methods =
        raw.contains("methods") ? raw.at("methods") : Json::array({"TTRP", "GaussianTRP", "SparseRP", "GaussianRP"});
    out["methods"] = Json::array();
    for (const auto& m : methods) out["methods"].push_back(to_string(parse_method(m.get<std::string>())));
    Json mr = Json::object();
    if (raw.contains("method_reps")) {
        for (const auto& [k, v] : raw.at("method_reps").items()) {
            if (!v.is_number_integer() || v.get<Index>() < 1) throw ConfigError("method_reps values must be positive");
            mr[to_string(parse_method(k))] = v;
        }
    }
    out["method_reps"] = mr;
    out["warmup"] = get_or<Index>(raw, "warmup", 1);
    if (out["warmup"].get<Index>() < 0) throw ConfigError("warmup must be non-negative");
    return out;
}

Json default_storage_entries() {
    return Json::parse(R"([
        {"method": "GaussianRP", "M": 24, "N": 10000},
        {"method": "SparseRP", "M": 24, "N": 10000, "s": "sqrtN"},
        {"method": "GaussianTRP", "M": 24, "n": [100, 100]},
        {"method": "TTRP", "M": 24, "m": [6, 4], "n": [100, 100]},
        {"method": "GaussianTRP", "M": 24, "n": [25, 20, 20]},
        {"method": "TTRP", "M": 24, "m": [4, 3, 2], "n": [25, 20, 20]},
        {"method": "GaussianTRP", "M": 24, "n": [10, 10, 10, 10]},
        {"method": "TTRP", "M": 24, "m": [3, 2, 2, 2], "n": [10, 10, 10, 10]}
    ])");
}

Json resolve_storage(const Json& raw, const Overrides& ov) {
    reject_unknown(raw, {"seed", "entries"}, "storage config");
    Json out;
    out["seed"] = resolved_seed(raw, ov);
    const Json entries = raw.contains("entries") ? raw.at("entries") : default_storage_entries();
    if (!entries.is_array() || entries.empty()) throw ConfigError("'entries' must be a non-empty list");
    out["entries"] = Json::array();
    for (const auto& e : entries) {
        reject_unknown(e, {"method", "M", "N", "m", "n", "rank", "distribution", "core_sparsity", "s"}, "storage entry");
        Json exp = e;
        exp.erase("N");
        // A resolved entry holds M as a one-element list; accept that so resolving is idempotent.
        if (exp.contains("M") && exp.at("M").is_array() && exp.at("M").size() == 1) exp["M"] = Json(exp.at("M").at(0));
        exp["M"] = positive(exp, "M", 24);
        Json re = resolve_experiment(exp);
        Index N = 0;
        if (re.contains("n")) {
            N = shape_of(re["n"]).total();
            if (e.contains("N") && e.at("N").get<Index>() != N) throw ConfigError("storage entry 'N' does not match 'n'");
        } else {
            N = positive(e, "N", 1);
        }
        re["N"] = N;
        out["entries"].push_back(re);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct Written {
    std::vector<std::filesystem::path> files;
    const std::filesystem::path& dir;
    void add(const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        files.push_back(dir / name);
    }
};

Index dataset_dimension(const Dataset& ds) { return ds.dimension; }

void run_ratio(const Json& cfg, Written& w, bool want_json, std::ostream& log) {
    const Dataset data = load_dataset(cfg.at("dataset"));
    if (data.size() < 2) throw DataError("ratio needs at least two data points");
    const Index N = dataset_dimension(data);
    const auto seed = cfg.at("seed").get<std::uint64_t>();

    CsvWriter reps_csv({"method", "M", "N", "m_dims", "n_dims", "rank", "distribution", "rep", "mean_ratio"});
    CsvWriter summary_csv({"method", "M", "N", "m_dims", "n_dims", "rank", "distribution", "reps", "grand_mean",
                           "variance", "rep_variance", "samples", "excluded_pairs", "storage"});
    Json summary = Json::array();
    std::map<std::string, Dataset> tensorized;

    for (const auto& exp : cfg.at("experiments")) {
        for (const auto& Mj : exp.at("M")) {
            const Index M = Mj.get<Index>();
            ExperimentConfig ec;
            ec.spec = spec_for(exp, M, N, projector_key(seed));
            ec.reps = cfg.at("reps").get<Index>();
            ec.seed = projector_key(seed);
            ec.threads = cfg.at("threads").get<unsigned>();
            ec.exclusion_threshold = cfg.at("exclusion_threshold").get<double>();
            const Dataset* src = &data;
            if (ec.spec.is_tensor_train()) {
                const std::string key = ec.spec.col_shape->to_string();
                auto it = tensorized.find(key);
                if (it == tensorized.end()) it = tensorized.emplace(key, tensorize_dataset(data, *ec.spec.col_shape)).first;
                src = &it->second;
            }
            const RatioStats st = repeat_stats(ec, *src);
            if (st.excluded_pairs > 0)
                log << "warning: " << st.excluded_pairs << " coincident point pairs excluded\n";
            const auto& s = ec.spec;
            const std::string method = to_string(s.method);
            const std::string mdims = shape_text(s.row_shape);
            const std::string ndims = shape_text(s.col_shape);
            const std::string dist = to_string(s.distribution);
            for (std::size_t r = 0; r < st.per_rep_means.size(); ++r)
                reps_csv.row({method, num(M), num(N), mdims, ndims, rank_text(s), dist, num(r), num(st.per_rep_means[r])});
            const Index storage = storage_count(s);
            summary_csv.row({method, num(M), num(N), mdims, ndims, rank_text(s), dist, num(ec.reps), num(st.mean),
                             num(st.variance), num(st.rep_variance), num(st.samples), num(st.excluded_pairs),
                             num(storage)});
            Json row{{"method", method}, {"M", M}, {"N", N}, {"m_dims", mdims}, {"n_dims", ndims},
                     {"rank", s.is_tensor_train() ? Json(s.rank) : Json()}, {"distribution", dist},
                     {"reps", ec.reps}, {"grand_mean", st.mean}, {"variance", st.variance},
                     {"rep_variance", st.rep_variance}, {"samples", st.samples},
                     {"excluded_pairs", st.excluded_pairs}, {"storage", storage}};
            if (s.method == Method::SparseRP) row["s"] = s.s;
            summary.push_back(row);
            log << method << " M=" << M << " " << mdims << (mdims.empty() ? "" : "/") << ndims
                << ": mean=" << num(st.mean) << " variance=" << num(st.variance) << "\n";
        }
    }
    w.add("ratio.csv", reps_csv.str());
    w.add("ratio_summary.csv", summary_csv.str());
    if (want_json) w.add("ratio_summary.json", summary.dump(2) + "\n");
}

void run_rank_sweep(const Json& cfg, Written& w, bool want_json, std::ostream& log) {
    Dataset data = load_dataset(cfg.at("dataset"));
    const Index N = dataset_dimension(data);
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const Index M = cfg.at("M").get<Index>();
    const TensorShape rows = row_shape_of(cfg.at("m"), M);
    const TensorShape cols = shape_of(cfg.at("n"));
    if (cols.total() != N) throw ConfigError("rank-sweep 'n' does not factor the dataset dimension");
    data = tensorize_dataset(std::move(data), cols);

    CsvWriter csv({"method", "M", "N", "m_dims", "n_dims", "rank", "distribution", "reps", "grand_mean", "variance",
                   "rep_variance", "samples", "storage"});
    Json summary = Json::array();
    for (const auto& mj : cfg.at("methods")) {
        const Method method = parse_method(mj.get<std::string>());
        for (const auto& rj : cfg.at("ranks")) {
            ExperimentConfig ec;
            ec.spec = method == Method::TTRP ? ProjectionSpec::ttrp(rows, cols, projector_key(seed), rj.get<Index>())
                                             : ProjectionSpec::gaussian_tt(rows, cols, projector_key(seed), rj.get<Index>());
            ec.reps = cfg.at("reps").get<Index>();
            ec.seed = projector_key(seed);
            ec.threads = cfg.at("threads").get<unsigned>();
            ec.exclusion_threshold = cfg.at("exclusion_threshold").get<double>();
            const RatioStats st = repeat_stats(ec, data);
            const Index storage = storage_count(ec.spec);
            const std::string dist = to_string(ec.spec.distribution);
            csv.row({to_string(method), num(M), num(N), rows.to_string(), cols.to_string(), num(ec.spec.rank), dist,
                     num(ec.reps), num(st.mean), num(st.variance), num(st.rep_variance), num(st.samples),
                     num(storage)});
            summary.push_back(Json{{"method", to_string(method)}, {"rank", ec.spec.rank}, {"grand_mean", st.mean},
                                   {"variance", st.variance}, {"rep_variance", st.rep_variance},
                                   {"samples", st.samples}, {"storage", storage}});
            log << to_string(method) << " r=" << ec.spec.rank << ": mean=" << num(st.mean)
                << " variance=" << num(st.variance) << "\n";
        }
    }
    w.add("rank_sweep.csv", csv.str());
    if (want_json) w.add("rank_sweep.json", summary.dump(2) + "\n");
}

void run_timing(const Json& cfg, Written& w, bool want_json, std::ostream& log) {
    TimingConfig tc;
    tc.M = cfg.at("M").get<Index>();
    tc.row_shape = shape_of(cfg.at("m"));
    tc.reps = cfg.at("reps").get<Index>();
    tc.warmup = cfg.at("warmup").get<Index>();
    tc.seed = StreamKey{cfg.at("seed").get<std::uint64_t>(), {2}};
    tc.methods.clear();
    for (const auto& m : cfg.at("methods")) tc.methods.push_back(parse_method(m.get<std::string>()));
    for (const auto& [k, v] : cfg.at("method_reps").items()) tc.method_reps[parse_method(k)] = v.get<Index>();
    for (const auto& c : cfg.at("cases")) tc.cases.push_back({c.at("N").get<Index>(), shape_of(c.at("n"))});

    const auto records = timing_bench(tc);
    CsvWriter csv({"method", "M", "N", "n_dims", "reps", "build_ns", "apply_ns", "total_ns", "tensorize_ns"});
    Json summary = Json::array();
    for (const auto& r : records) {
        csv.row({to_string(r.method), num(r.M), num(r.N), r.col_shape.to_string(), num(r.reps), num(r.build_ns),
                 num(r.apply_ns), num(r.total_ns), num(r.tensorize_ns)});
        summary.push_back(Json{{"method", to_string(r.method)}, {"M", r.M}, {"N", r.N},
                               {"n_dims", r.col_shape.to_string()}, {"reps", r.reps}, {"build_ns", r.build_ns},
                               {"apply_ns", r.apply_ns}, {"total_ns", r.total_ns},
                               {"tensorize_ns", r.tensorize_ns}});
        log << to_string(r.method) << " N=" << r.N << ": " << num(r.total_ns * 1e-6) << " ms\n";
    }
    w.add("timing.csv", csv.str());
    if (want_json) w.add("timing.json", summary.dump(2) + "\n");
}

void run_storage(const Json& cfg, Written& w, bool want_json, std::ostream&) {
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    CsvWriter csv({"method", "M", "N", "m_dims", "n_dims", "rank", "s", "storage", "realized_nonzeros"});
    Json summary = Json::array();
    for (const auto& e : cfg.at("entries")) {
        const Index M = e.at("M").at(0).get<Index>();
        const Index N = e.at("N").get<Index>();
        const ProjectionSpec spec = spec_for(e, M, N, projector_key(seed));
        const Index storage = storage_count(spec);
        const Index realized = realized_nonzeros(build_projector(spec, DenseStorage::Implicit));
        const std::string s_text = spec.method == Method::SparseRP ? num(spec.s) : "";
        csv.row({to_string(spec.method), num(M), num(N), shape_text(spec.row_shape), shape_text(spec.col_shape),
                 rank_text(spec), s_text, num(storage), num(realized)});
        summary.push_back(Json{{"method", to_string(spec.method)}, {"M", M}, {"N", N},
                               {"m_dims", shape_text(spec.row_shape)}, {"n_dims", shape_text(spec.col_shape)},
                               {"storage", storage}, {"realized_nonzeros", realized}});
    }
    w.add("storage.csv", csv.str());
    if (want_json) w.add("storage.json", summary.dump(2) + "\n");
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Index eval_mode(const Json& entry, Index M) {
    if (entry.is_number_integer()) {
        const auto v = entry.get<Index>();
        if (v < 1) throw ConfigError("mode sizes must be positive");
        return v;
    }
    if (!entry.is_string()) throw ConfigError("mode entries must be integers or \"M/k\" expressions");
    std::string text = entry.get<std::string>();
    std::erase(text, ' ');
    if (text == "M") return M;
    if (text.size() < 3 || text[0] != 'M' || (text[1] != '/' && text[1] != '*'))
        throw ConfigError("cannot parse mode expression '" + text + "'");
    Index k = 0;
    const auto res = std::from_chars(text.data() + 2, text.data() + text.size(), k);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || k < 1)
        throw ConfigError("cannot parse mode expression '" + text + "'");
    if (text[1] == '*') return M * k;
    if (M % k != 0) throw ConfigError("M = " + std::to_string(M) + " is not divisible by " + std::to_string(k));
    return M / k;
}

Json resolve_config(const std::string& command, const Json& raw_in, const Overrides& overrides) {
    const Json raw = raw_in.is_null() ? Json::object() : raw_in;
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
    try {
        if (command == "ratio") return resolve_ratio(raw, overrides);
        if (command == "rank-sweep") return resolve_rank_sweep(raw, overrides);
        if (command == "timing") return resolve_timing(raw, overrides);
        if (command == "storage") return resolve_storage(raw, overrides);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    throw ConfigError("unknown command '" + command + "'");
}

std::vector<std::filesystem::path> execute(const std::string& command, const Json& resolved,
                                           const std::filesystem::path& out_dir, SummaryFormat format,
                                           std::ostream& log) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    Written w{{}, out_dir};
    const bool want_json = format == SummaryFormat::Json;
    if (command == "ratio") run_ratio(resolved, w, want_json, log);
    else if (command == "rank-sweep") run_rank_sweep(resolved, w, want_json, log);
    else if (command == "timing") run_timing(resolved, w, want_json, log);
    else if (command == "storage") run_storage(resolved, w, want_json, log);
    else throw ConfigError("unknown command '" + command + "'");

    Json manifest;
    manifest["command"] = command;
    manifest["tool_version"] = kToolVersion;
    manifest["seed"] = resolved.at("seed");
    manifest["format"] = want_json ? "json" : "csv";
    manifest["config"] = resolved;
    manifest["outputs"] = Json::array();
    for (const auto& f : w.files) manifest["outputs"].push_back(f.filename().string());
    w.add("manifest.json", manifest.dump(2) + "\n");
    return w.files;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor train random projection experiments"};
    app.require_subcommand(1);

    struct Options {
        std::string config_file;
        std::string config_inline;
        std::optional<std::uint64_t> seed;
        std::optional<Index> reps;
        std::optional<unsigned> threads;
        std::string out_dir = "out";
        std::string format = "csv";
    } opt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_file, "JSON config file (a manifest.json is accepted)");
        sub->add_option("--config-json", opt.config_inline, "inline JSON config");
        sub->add_option("--seed", opt.seed, "root seed");
        sub->add_option("--reps", opt.reps, "repetitions");
        sub->add_option("--threads", opt.threads, "worker threads for repetitions");
        sub->add_option("--out-dir", opt.out_dir, "output directory");
        sub->add_option("--format", opt.format, "summary format")->check(CLI::IsMember({"csv", "json"}));
    };
    add_common(app.add_subcommand("ratio", "pairwise distance ratio statistics"));
    add_common(app.add_subcommand("rank-sweep", "ratio statistics across TT ranks"));
    add_common(app.add_subcommand("timing", "time per projection across N"));
    add_common(app.add_subcommand("storage", "stored entries per projector"));
    std::string replay_manifest;
    CLI::App* replay = app.add_subcommand("replay", "rerun a manifest.json");
    replay->add_option("manifest", replay_manifest, "manifest file")->required();
    replay->add_option("--out-dir", opt.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        std::string command = sub->get_name();
        Json raw = Json::object();
        Overrides ov{opt.seed, opt.reps, opt.threads};
        SummaryFormat format = opt.format == "json" ? SummaryFormat::Json : SummaryFormat::Csv;
        if (command == "replay") {
            const Json manifest = read_json_file(replay_manifest);
            if (!manifest.contains("command") || !manifest.contains("config"))
                throw ConfigError("not a manifest: " + replay_manifest);
            command = manifest.at("command").get<std::string>();
            raw = manifest.at("config");
            if (manifest.value("format", "csv") == "json") format = SummaryFormat::Json;
        } else {
            if (!opt.config_file.empty() && !opt.config_inline.empty())
                throw ConfigError("--config and --config-json are mutually exclusive");
            if (!opt.config_file.empty()) raw = read_json_file(opt.config_file);
            if (!opt.config_inline.empty()) {
                try {
                    raw = Json::parse(opt.config_inline);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ConfigError(std::string("inline config: ") + e.what());
                }
            }
            // A manifest carries its resolved config under "config".
            if (raw.is_object() && raw.contains("command") && raw.contains("config")) {
                if (raw.at("command") != command)
                    throw ConfigError("manifest is for '" + raw.at("command").get<std::string>() + "'");
                raw = Json(raw.at("config"));
            }
        }
        const Json resolved = resolve_config(command, raw, ov);
        const auto files = execute(command, resolved, opt.out_dir, format, err);
        for (const auto& f : files) out << f.string() << "\n";
        return kExitOk;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace ttrp::cli
