#include "transco/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "transco/errors.hpp"
#include "transco/rng.hpp"

namespace transco {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::json optional_json(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

nlohmann::json number_json(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

const std::vector<std::string> kRecordFields = {"method", "trial", "config_digest", "mse",        "log_mse",
                                                "f1",     "huber", "r2",            "runtime_ms", "seed"};

ResultRecord record_from_cells(const std::map<std::string, std::string>& cells) {
    auto get = [&](const std::string& k) -> const std::string& {
        const auto it = cells.find(k);
        if (it == cells.end()) throw IoError("results file lacks field " + k);
        return it->second;
    };
    auto num = [&](const std::string& k) {
        const auto v = parse_double(get(k));
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
    };
    ResultRecord r;
    r.method = parse_method(get("method"));
    r.trial = std::stoi(get("trial"));
    r.config_digest = get("config_digest");
    r.mse = num("mse");
    r.log_mse = get("log_mse").empty() ? -std::numeric_limits<double>::infinity() : num("log_mse");
    r.f1 = parse_double(get("f1"));
    r.huber = parse_double(get("huber"));
    r.r2 = parse_double(get("r2"));
    r.runtime_ms = std::stol(get("runtime_ms"));
    r.seed = std::stoull(get("seed"));
    return r;
}

MetricSummary summarize_values(const std::string& name, const std::vector<double>& v) {
    MetricSummary s;
    s.name = name;
    s.count = static_cast<long>(v.size());
    if (v.empty()) {
        s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) {
        s.sd = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return s;
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::IPOD: return "ipod";
        case Method::TransCO: return "transco";
        case Method::PTL: return "ptl";
        case Method::OLS: return "ols";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    const std::string s = lower(trim(name));
    if (s == "ipod") return Method::IPOD;
    if (s == "transco" || s == "trans-co") return Method::TransCO;
    if (s == "ptl") return Method::PTL;
    if (s == "ols") return Method::OLS;
    throw InvalidParameter("unknown method '" + name + "' (expected ipod, transco, ptl or ols)");
}

std::string format_number(double x) {
    if (!std::isfinite(x)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable read_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    CsvTable t;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (trim(line).empty()) continue;
            if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
            t.header = split_csv_line(line);
            have_header = true;
            continue;
        }
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) {
            throw IoError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                          std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw IoError(path.string() + ": missing header row");
    return t;
}

Dataset load_dataset_csv(const std::filesystem::path& path, const std::string& response_column, bool standardize) {
    const CsvTable t = read_csv(path);
    const auto it = std::find(t.header.begin(), t.header.end(), response_column);
    if (it == t.header.end()) {
        throw InvalidParameter(path.string() + ": response column '" + response_column + "' not found");
    }
    const std::size_t resp = static_cast<std::size_t>(it - t.header.begin());
    const std::size_t ncol = t.header.size();

    std::vector<std::vector<double>> kept;
    for (const auto& row : t.rows) {
        std::vector<double> vals(ncol);
        bool ok = true;
        for (std::size_t j = 0; j < ncol && ok; ++j) {
            const auto v = parse_double(row[j]);
            if (!v) ok = false;
            else vals[j] = *v;
        }
        if (ok) kept.push_back(std::move(vals));
    }
    if (kept.empty()) throw InvalidParameter(path.string() + ": no usable rows");

    const Eigen::Index n = static_cast<Eigen::Index>(kept.size());
    Eigen::MatrixXd all(n, static_cast<Eigen::Index>(ncol));
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ncol; ++j) all(i, static_cast<Eigen::Index>(j)) = kept[static_cast<std::size_t>(i)][j];

    if (standardize) {
        if (n < 2) throw InvalidParameter(path.string() + ": standardization needs at least two rows");
        for (Eigen::Index j = 0; j < all.cols(); ++j) {
            auto col = all.col(j);
            const double mean = col.mean();
            col.array() -= mean;
            const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
            if (!(sd > 0.0)) {
                throw InvalidParameter(path.string() + ": column '" + t.header[static_cast<std::size_t>(j)] +
                                       "' is constant and cannot be standardized");
            }
            col /= sd;
        }
    }

    Dataset d;
    d.Y = all.col(static_cast<Eigen::Index>(resp));
    d.X.resize(n, static_cast<Eigen::Index>(ncol) - 1);
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < ncol; ++j) {
        if (j == resp) continue;
        d.X.col(c++) = all.col(static_cast<Eigen::Index>(j));
    }
    return d;
}

SimulationConfig parse_experiment_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(key, value).second) throw ConfigError("config key '" + key + "' given twice");
    }

    static const std::vector<std::string> known = {
        "example_id", "n",    "p",       "K",          "N",        "s",     "rho",           "h",
        "covariance", "noise", "seed",   "trials",     "grid_size", "tol",  "max_iter",      "w",
        "contamination", "spread", "noise_scale"};
    for (const auto& [k, v] : kv) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
    }
    for (const char* req : {"example_id", "n", "p", "K", "N", "s", "rho"}) {
        if (!kv.count(req)) throw ConfigError(std::string("missing required config key '") + req + "'");
    }

    auto as_double = [&](const std::string& k) {
        const auto v = parse_double(kv.at(k));
        if (!v) throw ConfigError("config key '" + k + "' must be a number, got '" + kv.at(k) + "'");
        return *v;
    };
    auto as_int = [&](const std::string& k) -> long long {
        const double v = as_double(k);
        if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError("config key '" + k + "' must be an integer");
        return static_cast<long long>(v);
    };

    std::string ex = lower(kv.at("example_id"));
    if (ex.rfind("ex", 0) == 0) ex = ex.substr(2);
    const auto exn = parse_double(ex);
    if (!exn || *exn < 1 || *exn > 5 || *exn != std::floor(*exn)) {
        throw ConfigError("example_id must be one of Ex1..Ex5, got '" + kv.at("example_id") + "'");
    }
    SimulationConfig c = SimulationConfig::preset(static_cast<ExampleId>(static_cast<int>(*exn)));
    c.n = as_int("n");
    c.p = as_int("p");
    c.K = as_int("K");
    c.N = as_int("N");
    c.s = as_int("s");
    c.rho = as_double("rho");
    if (kv.count("h")) c.h = as_double("h");
    if (kv.count("seed")) {
        const long long sd = as_int("seed");
        if (sd < 0) throw ConfigError("seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(sd);
    }
    if (kv.count("trials")) c.trials = static_cast<int>(as_int("trials"));
    if (kv.count("grid_size")) c.grid_size = static_cast<int>(as_int("grid_size"));
    if (kv.count("tol")) c.tol = as_double("tol");
    if (kv.count("max_iter")) c.max_iter = static_cast<int>(as_int("max_iter"));
    if (kv.count("noise_scale")) c.noise_scale = as_double("noise_scale");
    if (kv.count("covariance")) {
        const std::string v = lower(kv.at("covariance"));
        if (v == "identity") c.covariance = CovarianceKind::Identity;
        else if (v == "toeplitz") c.covariance = CovarianceKind::ToeplitzPerSource;
        else if (v == "ar05") c.covariance = CovarianceKind::AR05;
        else throw ConfigError("covariance must be identity, toeplitz or ar05");
    }
    if (kv.count("noise")) {
        const std::string v = lower(kv.at("noise"));
        if (v == "unit") c.noise = NoiseKind::Unit;
        else if (v == "per_source") c.noise = NoiseKind::PerSourceScaled;
        else throw ConfigError("noise must be unit or per_source");
    }
    if (kv.count("w")) {
        const std::string v = lower(kv.at("w"));
        if (v == "fixed") c.w_spec = WeightSpec::Fixed;
        else if (v == "uniform") c.w_spec = WeightSpec::Uniform;
        else throw ConfigError("w must be fixed or uniform");
    }
    if (kv.count("contamination")) {
        const std::string v = lower(kv.at("contamination"));
        if (v == "per_point") c.shared_contamination = false;
        else if (v == "shared") c.shared_contamination = true;
        else throw ConfigError("contamination must be per_point or shared");
    }
    if (kv.count("spread")) {
        const std::string v = lower(kv.at("spread"));
        if (v == "variance") c.spread = SpreadConvention::Variance;
        else if (v == "sd") c.spread = SpreadConvention::StdDev;
        else throw ConfigError("spread must be variance or sd");
    }
    c.validate();
    return c;
}

SimulationConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_file(path));
}

std::string canonical_config(const SimulationConfig& c) {
    std::ostringstream o;
    o << "example_id = " << to_string(c.example_id) << "\n"
      << "n = " << c.n << "\n"
      << "p = " << c.p << "\n"
      << "K = " << c.K << "\n"
      << "N = " << c.N << "\n"
      << "s = " << c.s << "\n"
      << "rho = " << format_number(c.rho) << "\n"
      << "h = " << format_number(c.h) << "\n"
      << "covariance = " << to_string(c.covariance) << "\n"
      << "noise = " << to_string(c.noise) << "\n"
      << "w = " << (c.w_spec == WeightSpec::Fixed ? "fixed" : "uniform") << "\n"
      << "contamination = " << (c.shared_contamination ? "shared" : "per_point") << "\n"
      << "spread = " << (c.spread == SpreadConvention::Variance ? "variance" : "sd") << "\n"
      << "noise_scale = " << format_number(c.noise_scale) << "\n"
      << "seed = " << c.seed << "\n"
      << "trials = " << c.trials << "\n"
      << "grid_size = " << c.grid_size << "\n"
      << "tol = " << format_number(c.tol) << "\n"
      << "max_iter = " << c.max_iter << "\n";
    return o.str();
}

std::string config_digest(const SimulationConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(config))));
    return buf;
}

std::filesystem::path summary_path(const std::filesystem::path& path) {
    std::filesystem::path out = path;
    out.replace_filename(path.stem().string() + "_summary" + path.extension().string());
    return out;
}

const MetricSummary* MethodSummary::find(const std::string& name) const {
    for (const auto& m : metrics) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

std::vector<MethodSummary> summarize(const std::vector<ResultRecord>& records) {
    std::vector<MethodSummary> out;
    for (Method m : {Method::IPOD, Method::TransCO, Method::PTL, Method::OLS}) {
        std::vector<double> mse, lmse, f1, hub, r2, rt;
        long count = 0;
        for (const auto& r : records) {
            if (r.method != m) continue;
            ++count;
            mse.push_back(r.mse);
            if (std::isfinite(r.log_mse)) lmse.push_back(r.log_mse);
            if (r.f1) f1.push_back(*r.f1);
            if (r.huber) hub.push_back(*r.huber);
            if (r.r2) r2.push_back(*r.r2);
            rt.push_back(static_cast<double>(r.runtime_ms));
        }
        if (count == 0) continue;
        MethodSummary s;
        s.method = m;
        s.trials = count;
        s.metrics = {summarize_values("mse", mse),   summarize_values("log_mse", lmse), summarize_values("f1", f1),
                     summarize_values("huber", hub), summarize_values("r2", r2),        summarize_values("runtime_ms", rt)};
        out.push_back(std::move(s));
    }
    return out;
}

void write_results(const std::filesystem::path& path, const std::vector<ResultRecord>& records, ResultFormat format) {
    const auto summary = summarize(records);
    const std::filesystem::path spath = summary_path(path);
    if (format == ResultFormat::CSV) {
        {
            auto out = open_out(path);
            for (std::size_t i = 0; i < kRecordFields.size(); ++i) out << (i ? "," : "") << kRecordFields[i];
            out << "\n";
            for (const auto& r : records) {
                out << to_string(r.method) << "," << r.trial << "," << r.config_digest << "," << format_number(r.mse)
                    << "," << format_number(r.log_mse) << "," << optional_cell(r.f1) << "," << optional_cell(r.huber)
                    << "," << optional_cell(r.r2) << "," << r.runtime_ms << "," << r.seed << "\n";
            }
            finish_write(out, path);
        }
        auto out = open_out(spath);
        out << "# sd columns use the sample (n-1) standard deviation\n";
        out << "method,trials";
        for (const char* m : {"mse", "log_mse", "f1", "huber", "r2", "runtime_ms"}) out << "," << m << "_mean," << m << "_sd";
        out << "\n";
        for (const auto& s : summary) {
            out << to_string(s.method) << "," << s.trials;
            for (const auto& m : s.metrics) out << "," << format_number(m.mean) << "," << format_number(m.sd);
            out << "\n";
        }
        finish_write(out, spath);
        return;
    }

    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json o;
        o["method"] = to_string(r.method);
        o["trial"] = r.trial;
        o["config_digest"] = r.config_digest;
        o["mse"] = number_json(r.mse);
        o["log_mse"] = number_json(r.log_mse);
        o["f1"] = optional_json(r.f1);
        o["huber"] = optional_json(r.huber);
        o["r2"] = optional_json(r.r2);
        o["runtime_ms"] = r.runtime_ms;
        o["seed"] = r.seed;
        arr.push_back(std::move(o));
    }
    {
        auto out = open_out(path);
        out << arr.dump(2) << "\n";
        finish_write(out, path);
    }
    nlohmann::ordered_json sj;
    sj["sd_convention"] = "sample (n-1)";
    sj["methods"] = nlohmann::ordered_json::array();
    for (const auto& s : summary) {
        nlohmann::ordered_json o;
        o["method"] = to_string(s.method);
        o["trials"] = s.trials;
        for (const auto& m : s.metrics) {
            o[m.name + "_mean"] = number_json(m.mean);
            o[m.name + "_sd"] = number_json(m.sd);
        }
        sj["methods"].push_back(std::move(o));
    }
    auto out = open_out(spath);
    out << sj.dump(2) << "\n";
    finish_write(out, spath);
}

std::vector<ResultRecord> read_results(const std::filesystem::path& path, ResultFormat format) {
    std::vector<ResultRecord> out;
    if (format == ResultFormat::CSV) {
        const CsvTable t = read_csv(path);
        for (const auto& row : t.rows) {
            std::map<std::string, std::string> cells;
            for (std::size_t j = 0; j < t.header.size(); ++j) cells[t.header[j]] = row[j];
            out.push_back(record_from_cells(cells));
        }
        return out;
    }
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    for (const auto& o : arr) {
        std::map<std::string, std::string> cells;
        for (const auto& f : kRecordFields) {
            const auto& v = o.at(f);
            if (v.is_null()) cells[f] = "";
            else if (v.is_string()) cells[f] = v.get<std::string>();
            else if (v.is_number_float()) cells[f] = format_number(v.get<double>());
            else cells[f] = v.dump();
        }
        out.push_back(record_from_cells(cells));
    }
    return out;
}

void write_plot_data(const std::filesystem::path& path, const std::vector<ResultRecord>& records, long n) {
    auto out = open_out(path);
    out << "method,n,trial,log_mse\n";
    for (const auto& r : records) {
        out << to_string(r.method) << "," << n << "," << r.trial << "," << format_number(r.log_mse) << "\n";
    }
    finish_write(out, path);
}

}  // namespace transco
