#include "gmt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gmt/error.hpp"

namespace gmt::io {

namespace {

double number(const json& j, const std::string& key) {
    if (!j.contains(key)) throw InvalidInput("missing field \"" + key + "\" in " + j.dump());
    const json& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw InvalidInput("field \"" + key + "\" must be a number");
}

double number_or(const json& j, const std::string& key, double fallback) {
    return j.contains(key) ? number(j, key) : fallback;
}

double bound(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw InvalidInput("interval bound must be a number, \"inf\" or \"-inf\"");
}

std::string type_of(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw InvalidInput("specification needs a string \"type\": " + j.dump());
    }
    return j.at("type").get<std::string>();
}

// Rate of K(phi(s), phi(t)) from a constant base rate.
std::optional<RateFunction> transformed_rate(const std::optional<RateFunction>& base, const json& time_change) {
    if (!base) return std::nullopt;
    if (base->is_infinite()) return base;
    const auto& c = base->constant_value();
    if (!c) return std::nullopt;
    if (*c == 0.0) return RateFunction::constant(0.0);
    const TimeFunction phi = parse_time_function(time_change);
    if (const auto& aff = phi.affine_coefficients()) return RateFunction::constant(*c * aff->first);
    if (time_change.is_object() && type_of(time_change) == "log") {
        const double k = *c * number_or(time_change, "coefficient", 1.0);
        return RateFunction::with_integral([k](double t) { return k / t; },
                                           [k](double lo, double hi) {
                                               if (!(lo > 0.0)) throw InvalidRate("rate integrated through t <= 0");
                                               return k * std::log1p((hi - lo) / lo);
                                           },
                                           format_double(k) + "/t");
    }
    return std::nullopt;
}

}  // namespace

json load_json_argument(const std::string& text_or_path) {
    std::size_t first = text_or_path.find_first_not_of(" \t\r\n");
    const bool inline_json = first != std::string::npos &&
                             (text_or_path[first] == '{' || text_or_path[first] == '[' || text_or_path[first] == '"');
    try {
        if (inline_json) return json::parse(text_or_path);
        std::ifstream in(text_or_path);
        if (!in) throw InvalidInput("cannot open " + text_or_path);
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed JSON: ") + e.what());
    }
}

Interval parse_interval(const json& spec) {
    if (spec.is_array()) {
        if (spec.size() != 2) throw InvalidInput("interval arrays need two bounds");
        const double lo = bound(spec[0]);
        const double hi = bound(spec[1]);
        if (!(lo < hi)) throw InvalidInput("interval bounds must satisfy lo < hi");
        return {lo, hi, !std::isfinite(lo), !std::isfinite(hi)};
    }
    if (spec.is_object()) {
        Interval i{bound(spec.at("lo")), bound(spec.at("hi")), spec.value("lo_open", false), spec.value("hi_open", false)};
        if (!(i.lo < i.hi)) throw InvalidInput("interval bounds must satisfy lo < hi");
        return i;
    }
    throw InvalidInput("interval must be an array [lo, hi] or an object");
}

TimeFunction parse_time_function(const json& spec) {
    if (spec.is_number()) return TimeFunction::constant(spec.get<double>());
    if (spec.is_string() && spec.get<std::string>() == "identity") return TimeFunction::identity();
    const std::string type = type_of(spec);
    if (type == "constant") return TimeFunction::constant(number(spec, "value"));
    if (type == "identity") return TimeFunction::identity();
    if (type == "affine") return TimeFunction::affine(number(spec, "slope"), number_or(spec, "intercept", 0.0));
    if (type == "power") return TimeFunction::power(number_or(spec, "coefficient", 1.0), number(spec, "exponent"));
    if (type == "exponential") return TimeFunction::exponential(number_or(spec, "coefficient", 1.0), number(spec, "rate"));
    if (type == "log") return TimeFunction::logarithm(number_or(spec, "coefficient", 1.0));
    throw InvalidInput("unknown function type \"" + type + "\"");
}

RateFunction parse_rate(const json& spec) {
    if (spec.is_number()) return RateFunction::constant(spec.get<double>());
    if (spec.is_string()) {
        const auto s = spec.get<std::string>();
        if (s == "inf" || s == "infinite") return RateFunction::infinite();
        throw InvalidInput("unknown rate \"" + s + "\"");
    }
    const std::string type = type_of(spec);
    if (type == "constant") return RateFunction::constant(number(spec, "value"));
    if (type == "infinite") return RateFunction::infinite();
    if (type == "linear") return RateFunction::linear(number_or(spec, "intercept", 0.0), number(spec, "slope"));
    if (type == "polynomial") {
        const auto c = spec.at("coefficients").get<std::vector<double>>();
        if (c.empty()) throw InvalidInput("polynomial rate needs coefficients");
        auto eval = [c](double t) {
            double v = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
            return v;
        };
        return RateFunction::custom(eval, "polynomial");
    }
    throw InvalidInput("unknown rate type \"" + type + "\"");
}

KernelSpec parse_kernel(const json& spec) {
    const std::string type = type_of(spec);
    KernelSpec out{kernels::constant(), std::nullopt, spec};
    if (type == "fbm") {
        const double h = number(spec, "hurst");
        out.kernel = kernels::fbm(h);
        out.rate = kernels::fbm_rate(h);
    } else if (type == "fbm_log") {
        const double h = number(spec, "hurst");
        out.kernel = kernels::fbm_log(h);
        out.rate = kernels::fbm_log_rate(h);
    } else if (type == "exponential") {
        const RateFunction a = parse_rate(spec.at("alpha"));
        const Interval dom = spec.contains("domain") ? parse_interval(spec.at("domain")) : Interval::real_line();
        out.kernel = kernels::exponential_rate(a, dom);
        out.rate = a;
    } else if (type == "constant") {
        out.kernel = kernels::constant(number_or(spec, "value", 1.0));
        out.rate = RateFunction::constant(0.0);
    } else if (type == "white_noise") {
        out.kernel = kernels::white_noise();
        out.rate = RateFunction::infinite();
    } else if (type == "spectral") {
        SpectralMeasure mu;
        if (spec.contains("atoms")) {
            mu = measure_from_json(spec);
            out.rate = RateFunction::constant(0.0);
        } else if (spec.contains("counterexample") || spec.contains("weierstrass")) {
            const bool counter = spec.contains("counterexample");
            const json& c = counter ? spec.at("counterexample") : spec.at("weierstrass");
            WeierstrassConfig cfg;
            cfg.k_cut = c.value("k_cut", cfg.k_cut);
            cfg.i_max = c.value("i_max", cfg.i_max);
            cfg.budget = c.value("budget", cfg.budget);
            mu = counter ? counterexample_measure(cfg) : weierstrass_measure(cfg);
        } else {
            throw InvalidInput("spectral kernel needs \"atoms\", \"counterexample\" or \"weierstrass\"");
        }
        out.kernel = kernel_from_spectral(mu);
    } else if (type == "noise_integral") {
        const std::string integrand = spec.value("integrand", std::string("sqrt_exp"));
        std::function<double(double, double)> k;
        if (integrand == "sqrt_exp") {
            k = [](double t, double u) { return std::sqrt(t) * std::exp(-0.5 * t * u); };
        } else if (integrand == "exp") {
            k = [](double t, double u) { return std::exp(-t * u); };
        } else {
            throw InvalidInput("unknown noise_integral integrand \"" + integrand + "\"");
        }
        const Interval J = spec.contains("interval") ? parse_interval(spec.at("interval")) : Interval{0.0, kInf, true, true};
        const Interval dom = spec.contains("domain") ? parse_interval(spec.at("domain")) : Interval::positive();
        if (!(dom.lo >= 0.0)) throw InvalidInput("noise_integral kernels live on t > 0");
        out.kernel = kernels::noise_integral(k, J, dom);
        out.rate = RateFunction::constant(0.0);
    } else if (type == "transformed") {
        const KernelSpec base = parse_kernel(spec.at("base"));
        const json scale = spec.value("scale", json(1.0));
        const json phi = spec.value("time_change", json("identity"));
        const Interval dom = spec.contains("domain") ? parse_interval(spec.at("domain")) : base.kernel.domain();
        out.kernel = transform_kernel(base.kernel, parse_time_function(scale), parse_time_function(phi), dom);
        out.rate = transformed_rate(base.rate, phi);
    } else if (type == "combination") {
        std::vector<std::pair<double, Kernel>> terms;
        for (const auto& t : spec.at("terms")) terms.emplace_back(number(t, "weight"), parse_kernel(t.at("kernel")).kernel);
        out.kernel = kernels::combination(terms);
    } else {
        throw InvalidInput("unknown kernel type \"" + type + "\"");
    }
    if (spec.contains("mean")) {
        const TimeFunction m = parse_time_function(spec.at("mean"));
        out.kernel = out.kernel.with_mean([m](double t) { return m(t); });
    }
    return out;
}

Grid parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw InvalidInput("grid must be start:stop:count");
    double start = 0.0;
    double stop = 0.0;
    long count = 0;
    try {
        start = std::stod(parts[0]);
        stop = std::stod(parts[1]);
        count = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw InvalidInput("grid must be start:stop:count");
    }
    if (count < 1) throw InvalidInput("grid count must be positive");
    if (count == 1) return {start};
    if (!(stop > start)) throw InvalidInput("grid needs stop > start");
    Grid g(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) g[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    g.back() = stop;
    return g;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        if (b == std::string::npos) continue;
        item = item.substr(b, item.find_last_not_of(' ') - b + 1);
        try {
            if (item.rfind("2^", 0) == 0) {
                out.push_back(std::ldexp(1.0, std::stoi(item.substr(2))));
            } else if (item == "inf") {
                out.push_back(kInf);
            } else {
                std::size_t used = 0;
                out.push_back(std::stod(item, &used));
                if (used != item.size()) throw InvalidInput("bad number");
            }
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse number \"" + item + "\"");
        }
    }
    if (out.empty()) throw InvalidInput("empty number list");
    return out;
}

json to_json(const GaussianVector& g) {
    json j;
    j["times"] = g.times;
    j["mean"] = std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size());
    json cov = json::array();
    for (Eigen::Index i = 0; i < g.cov.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(g.cov.cols()));
        for (Eigen::Index k = 0; k < g.cov.cols(); ++k) row[k] = g.cov(i, k);
        cov.push_back(row);
    }
    j["cov"] = cov;
    return j;
}

GaussianVector gaussian_from_json(const json& j) {
    GaussianVector g;
    try {
        g.times = j.value("times", std::vector<double>{});
        const auto mean = j.at("mean").get<std::vector<double>>();
        const auto cov = j.at("cov").get<std::vector<std::vector<double>>>();
        const auto n = static_cast<Eigen::Index>(mean.size());
        g.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
        g.cov.resize(n, n);
        if (static_cast<Eigen::Index>(cov.size()) != n) throw InvalidInput("covariance has the wrong number of rows");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(cov[i].size()) != n) throw InvalidInput("covariance row has the wrong length");
            for (Eigen::Index k = 0; k < n; ++k) g.cov(i, k) = cov[i][k];
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed Gaussian vector: ") + e.what());
    }
    g.validate();
    return g;
}

json to_json(const SpectralMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({{"weight", a.weight}, {"location", a.location}});
    return {{"atoms", atoms}, {"total_mass", mu.total_mass()}};
}

SpectralMeasure measure_from_json(const json& j) {
    std::vector<Atom> atoms;
    try {
        for (const auto& a : j.at("atoms")) atoms.push_back({a.at("weight").get<double>(), a.at("location").get<double>()});
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed spectral measure: ") + e.what());
    }
    SpectralMeasure mu(std::move(atoms));
    mu.validate();
    return mu;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + format_double(row[i]);
        text += "\n";
    }
    write_text(path, text);
}

void write_batch_csv(const std::string& path, const TrajectoryBatch& batch, long max_paths) {
    std::vector<std::string> header;
    for (double t : batch.times) header.push_back("t=" + format_double(t));
    std::vector<std::vector<double>> rows;
    const long n = std::min<long>(max_paths, static_cast<long>(batch.paths.rows()));
    for (long p = 0; p < n; ++p) {
        std::vector<double> row(static_cast<std::size_t>(batch.paths.cols()));
        for (Eigen::Index j = 0; j < batch.paths.cols(); ++j) row[j] = batch.paths(p, j);
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

}  // namespace gmt::io
