#include "gmt/cli.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "gmt/error.hpp"
#include "gmt/spectral.hpp"
#include "gmt/transform.hpp"

namespace gmt::cli {

using io::json;

namespace {

struct UsageError : InvalidInput {
    using InvalidInput::InvalidInput;
};

std::string join_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw UsageError("cannot create output directory " + cfg.out);
}

io::KernelSpec load_kernel(const std::optional<json>& spec, const char* flag) {
    if (!spec) throw UsageError(std::string("missing ") + flag);
    try {
        return io::parse_kernel(*spec);
    } catch (const BudgetExceeded&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(std::string("bad ") + flag + ": " + e.what());
    }
}

RateFunction resolve_rate(const RunConfig& cfg, const io::KernelSpec& k) {
    if (cfg.alpha) {
        try {
            return io::parse_rate(*cfg.alpha);
        } catch (const InvalidRate&) {
            throw;
        } catch (const Error& e) {
            throw UsageError(std::string("bad --alpha: ") + e.what());
        }
    }
    if (k.rate) return *k.rate;
    throw UsageError("no --alpha given and the kernel has no closed-form decay rate");
}

std::vector<Grid> grids_of(const RunConfig& cfg) {
    if (cfg.grids.empty()) throw UsageError("missing --grid");
    std::vector<Grid> out;
    try {
        for (const auto& g : cfg.grids) out.push_back(io::parse_grid(g));
    } catch (const Error& e) {
        throw UsageError(std::string("bad --grid: ") + e.what());
    }
    return out;
}

std::pair<double, double> interval_of(const RunConfig& cfg) {
    const auto colon = cfg.interval.find(':');
    try {
        if (colon == std::string::npos) throw UsageError("");
        const double s = std::stod(cfg.interval.substr(0, colon));
        const double t = std::stod(cfg.interval.substr(colon + 1));
        if (!(s < t)) throw UsageError("");
        return {s, t};
    } catch (const std::exception&) {
        throw UsageError("--interval must be s:t with s < t");
    }
}

json rate_json(const std::optional<json>& j) { return j ? *j : json(nullptr); }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index k = 0; k < m.cols(); ++k) r[k] = m(i, k);
        rows.push_back(r);
    }
    return rows;
}

json empirical_json(const EmpiricalCovariance& e) {
    json j = io::to_json(e.estimate);
    j["mean_se"] = std::vector<double>(e.mean_se.data(), e.mean_se.data() + e.mean_se.size());
    j["cov_se"] = matrix_json(e.cov_se);
    j["n_paths"] = e.n_paths;
    return j;
}

}  // namespace

RunConfig defaults_for(const std::string& command) {
    RunConfig cfg;
    cfg.command = command;
    if (command == "psd-check") {
        cfg.grids = {"1:5:5"};
    } else if (command == "transform") {
        cfg.grids = {"1:2:3"};
    } else if (command == "converge") {
        cfg.mode = "local";
        for (int k = 3; k <= 12; ++k) cfg.mesh_sequence.push_back(std::ldexp(1.0, -k));
        cfg.grids = {"0:1:3"};
    } else if (command == "simulate") {
        cfg.mode = "figure";
        cfg.kernel = json{{"type", "exponential"}, {"alpha", 1.0}};
        cfg.grids = {"0:5:6"};
    }
    return cfg;
}

void apply_config(RunConfig& cfg, const json& file) {
    if (!file.is_object()) throw UsageError("config file must hold a JSON object");
    try {
        for (const auto& [key, v] : file.items()) {
            if (key == "kernel") {
                cfg.kernel = v;
            } else if (key == "target") {
                cfg.target = v;
            } else if (key == "alpha") {
                cfg.alpha = v;
            } else if (key == "grid") {
                cfg.grids = v.is_array() ? v.get<std::vector<std::string>>() : std::vector<std::string>{v.get<std::string>()};
            } else if (key == "mesh_sequence") {
                cfg.mesh_sequence = v.is_string() ? io::parse_number_list(v.get<std::string>()) : v.get<std::vector<double>>();
            } else if (key == "mode") {
                cfg.mode = v.get<std::string>();
            } else if (key == "interval") {
                cfg.interval = v.get<std::string>();
            } else if (key == "paths") {
                cfg.paths = v.get<long>();
            } else if (key == "seed") {
                cfg.seed = v.get<std::uint64_t>();
            } else if (key == "step") {
                cfg.step = v.get<double>();
            } else if (key == "out") {
                cfg.out = v.get<std::string>();
            } else if (key == "targets") {
                cfg.targets = v.is_string() ? io::parse_number_list(v.get<std::string>()) : v.get<std::vector<double>>();
            } else if (key == "i_max") {
                cfg.i_max = v.get<int>();
            } else if (key == "k_cut") {
                cfg.k_cut = v.get<int>();
            } else if (key == "budget") {
                cfg.budget = v.get<long long>();
            } else if (key == "export_paths") {
                cfg.export_paths = v.get<long>();
            } else {
                throw UsageError("unknown config key \"" + key + "\"");
            }
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad config value: ") + e.what());
    }
}

int cmd_psd_check(const RunConfig& cfg, std::ostream& log) {
    const io::KernelSpec k = load_kernel(cfg.kernel, "--kernel");
    const std::vector<Grid> grids = grids_of(cfg);
    ensure_out_dir(cfg);
    json report{{"kernel", *cfg.kernel}, {"tolerance", kPsdTolerance}, {"grids", json::array()}};
    bool all = true;
    for (const auto& g : grids) {
        const PsdReport r = psd_check(k.kernel, g);
        all = all && r.pass;
        report["grids"].push_back(
            {{"grid", g}, {"min_eigenvalue", r.min_eigenvalue}, {"max_diagonal", r.max_diagonal}, {"pass", r.pass}});
        log << "grid of " << g.size() << " points: min eigenvalue " << io::format_double(r.min_eigenvalue)
            << (r.pass ? " (pass)" : " (FAIL)") << "\n";
    }
    report["pass"] = all;
    io::write_json(join_path(cfg, "psd_report.json"), report);
    return all ? kSuccess : kFailure;
}

int cmd_transform(const RunConfig& cfg, std::ostream& log) {
    const io::KernelSpec k = load_kernel(cfg.kernel, "--kernel");
    const RateFunction alpha = resolve_rate(cfg, k);
    const std::vector<Grid> grids = grids_of(cfg);
    ensure_out_dir(cfg);
    const Kernel mimic = transform::mimic_kernel(k.kernel, alpha);
    std::vector<std::vector<double>> rows;
    for (const auto& g : grids) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (std::size_t j = i; j < g.size(); ++j) rows.push_back({g[i], g[j], k.kernel(g[i], g[j]), mimic(g[i], g[j])});
        }
    }
    io::write_csv(join_path(cfg, "transform.csv"), {"s", "t", "K", "K_prime"}, rows);
    log << "rate " << alpha.description() << ", " << rows.size() << " pairs written\n";
    return kSuccess;
}

int cmd_converge(const RunConfig& cfg, std::ostream& log) {
    const io::KernelSpec k = load_kernel(cfg.kernel, "--kernel");
    const Kernel target = cfg.target ? load_kernel(cfg.target, "--target").kernel
                                     : transform::mimic_kernel(k.kernel, resolve_rate(cfg, k));
    if (cfg.mesh_sequence.empty()) throw UsageError("empty --mesh-sequence");
    for (double m : cfg.mesh_sequence) {
        if (!(m > 0.0)) throw UsageError("--mesh-sequence entries must be positive");
    }
    std::vector<transform::ConvergenceRow> rows;
    std::string key;
    if (cfg.mode == "local") {
        const auto [s, t] = interval_of(cfg);
        std::vector<Partition> parts;
        for (double m : cfg.mesh_sequence) parts.push_back(Partition::with_mesh(s, t, m));
        rows = transform::convergence_experiment(k.kernel, target, s, t, parts);
        key = "mesh";
    } else if (cfg.mode == "global") {
        const Grid S = grids_of(cfg).front();
        const std::vector<double> steps = cfg.mesh_sequence;
        const auto adm = AdmissibleSequence::lattice([steps](int n) { return steps[static_cast<std::size_t>(n - 1)]; });
        rows = transform::global_experiment(k.kernel, target, adm, S, static_cast<int>(steps.size()));
        key = "n";
    } else {
        throw UsageError("--mode must be local or global");
    }
    ensure_out_dir(cfg);
    std::vector<std::vector<double>> table;
    for (const auto& r : rows) table.push_back({r.key, r.distance, r.correlation, r.target_correlation});
    io::write_csv(join_path(cfg, "converge.csv"), {key, "distance", "correlation", "target_correlation"}, table);
    log << "final distance " << io::format_double(rows.back().distance) << " over " << rows.size() << " rows\n";
    return kSuccess;
}

int cmd_counterexample(const RunConfig& cfg, std::ostream& log) {
    WeierstrassConfig wc;
    wc.k_cut = cfg.k_cut;
    wc.i_max = cfg.i_max;
    wc.budget = cfg.budget;
    try {
        wc.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    ensure_out_dir(cfg);

    WeierstrassIndices idx;
    std::string budget_message;
    try {
        idx = weierstrass_indices(wc);
    } catch (const IndexBudgetExceeded& e) {
        idx = e.partial();
        budget_message = e.what();
    }

    std::vector<std::vector<double>> rows;
    const auto& n = idx.n;
    for (std::size_t j = 0; j < n.size(); ++j) {
        const double x = static_cast<double>(n[j] - 1);
        double value = std::nan("");
        double bound = std::nan("");
        double holds = std::nan("");
        if (j % 2 == 1) {
            const auto i = static_cast<double>((j - 1) / 2);
            value = weierstrass::f(n[j - 1], x, wc);
            bound = i;
            holds = value > bound ? 1.0 : 0.0;
        } else if (j > 0) {
            const auto i = static_cast<double>((j - 2) / 2);
            const std::vector<long long> prefix(n.begin(), n.begin() + static_cast<std::ptrdiff_t>(j));
            value = weierstrass::g(weierstrass::active_blocks(prefix), x, wc);
            bound = i == 0.0 ? kInf : 1.0 / i;
            holds = value < bound ? 1.0 : 0.0;
        }
        rows.push_back({static_cast<double>(j), static_cast<double>(n[j]), x, value, bound, holds});
    }
    io::write_csv(join_path(cfg, "indices.csv"), {"j", "n_j", "x", "value", "bound", "holds"}, rows);

    if (idx.decided_through >= wc.k_cut) {
        const SpectralMeasure mu = counterexample_measure(idx, wc);
        io::write_json(join_path(cfg, "measure.json"), io::to_json(mu));

        std::vector<std::vector<double>> seq;
        for (std::size_t i = 1; 2 * i + 2 < n.size(); ++i) {
            const double s_i = 1.0 / static_cast<double>(n[2 * i + 1] - 1);
            const double t_i = 1.0 / static_cast<double>(n[2 * i + 2] - 1);
            seq.push_back({static_cast<double>(i), s_i, fourier_decay_rate(mu, s_i), t_i, fourier_decay_rate(mu, t_i)});
        }
        io::write_csv(join_path(cfg, "sequence.csv"), {"i", "s_i", "rate_s_i", "t_i", "rate_t_i"}, seq);

        std::vector<std::vector<double>> wit;
        for (const auto& w : cluster_witnesses(mu, cfg.targets)) {
            wit.push_back({w.target, w.t, w.rate, w.error, w.found ? 1.0 : 0.0});
            log << "target " << io::format_double(w.target) << ": "
                << (w.found ? "t = " + io::format_double(w.t) : "not found (" + w.message + ")") << "\n";
        }
        io::write_csv(join_path(cfg, "witnesses.csv"), {"target", "t", "rate", "error", "found"}, wit);
    } else {
        log << "indices decide y_k only up to k = " << idx.decided_through << "; measure not written\n";
    }
    if (!budget_message.empty()) {
        log << "budget exceeded: " << budget_message << "\n";
        return kBudget;
    }
    return kSuccess;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const io::KernelSpec k = load_kernel(cfg.kernel, "--kernel");
    const Grid grid = grids_of(cfg).front();
    if (cfg.paths < 2) throw UsageError("--paths must be at least 2");
    if (!(cfg.step > 0.0)) throw UsageError("--step must be positive");
    ensure_out_dir(cfg);
    json summary{{"mode", cfg.mode}, {"kernel", *cfg.kernel}, {"alpha", rate_json(cfg.alpha)}, {"seed", cfg.seed},
                 {"paths", cfg.paths}, {"step", cfg.step}, {"grid", grid}};

    if (cfg.mode == "figure") {
        FigureOptions opts;
        opts.step = cfg.step;
        const FigureReport r = figure_comparison(k.kernel, resolve_rate(cfg, k), grid, cfg.paths, cfg.seed, opts);
        io::write_batch_csv(join_path(cfg, "sde_paths.csv"), r.sde_batch, cfg.export_paths);
        io::write_batch_csv(join_path(cfg, "gaussian_paths.csv"), r.gaussian_batch, cfg.export_paths);
        summary["analytic_cov"] = matrix_json(r.analytic);
        summary["sde"] = empirical_json(r.sde);
        summary["gaussian"] = empirical_json(r.gaussian);
        summary["max_cov_discrepancy"] = r.max_cov_discrepancy;
        summary["max_sde_vs_analytic"] = r.max_sde_vs_analytic;
        summary["max_gaussian_vs_analytic"] = r.max_gaussian_vs_analytic;
        summary["pass"] = r.pass;
        io::write_json(join_path(cfg, "summary.json"), summary);
        log << "max covariance discrepancy " << io::format_double(r.max_cov_discrepancy)
            << (r.pass ? " (within band)" : " (OUTSIDE band)") << "\n";
        return r.pass ? kSuccess : kFailure;
    }

    TrajectoryBatch batch;
    if (cfg.mode == "cholesky") {
        batch = cholesky_sample(GaussianVector::from_kernel(k.kernel, grid), cfg.paths, cfg.seed);
        summary["analytic_cov"] = matrix_json(k.kernel.gram(grid));
    } else if (cfg.mode == "ou") {
        const RateFunction a = resolve_rate(cfg, k);
        batch = ou_exact(a, grid, cfg.paths, cfg.seed);
        summary["analytic_cov"] = matrix_json(transform::k_alpha(a).gram(grid));
    } else if (cfg.mode == "em") {
        const RateFunction a = resolve_rate(cfg, k);
        batch = euler_maruyama(mimicking_sde(k.kernel, a, grid.front(), cfg.step), grid, cfg.paths, cfg.seed);
        summary["analytic_cov"] = matrix_json(transform::mimic_kernel(k.kernel, a).gram(grid));
    } else {
        throw UsageError("--mode must be figure, cholesky, ou or em");
    }
    summary["source"] = to_string(batch.source);
    summary["empirical"] = empirical_json(empirical_covariance(batch));
    io::write_batch_csv(join_path(cfg, "trajectories.csv"), batch, cfg.export_paths);
    io::write_json(join_path(cfg, "summary.json"), summary);
    log << batch.paths.rows() << " paths on " << grid.size() << " times written\n";
    return kSuccess;
}

int run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (cfg.command == "psd-check") return cmd_psd_check(cfg, log);
        if (cfg.command == "transform") return cmd_transform(cfg, log);
        if (cfg.command == "converge") return cmd_converge(cfg, log);
        if (cfg.command == "counterexample") return cmd_counterexample(cfg, log);
        if (cfg.command == "simulate") return cmd_simulate(cfg, log);
        err << "unknown command " << cfg.command << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

int main(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
    CLI::App app{"Markov transforms of Gaussian processes", "gmt"};
    app.require_subcommand(1);

    struct Flags {
        std::string kernel, target, alpha, mesh, mode, interval, out, targets, config;
        std::vector<std::string> grids;
        long paths = 0;
        std::uint64_t seed = 0;
        double step = 0.0;
        int i_max = 0;
        int k_cut = 0;
        long long budget = 0;
        long export_paths = 0;
    } f;
    std::vector<std::pair<CLI::App*, std::string>> subs = {
        {nullptr, "psd-check"}, {nullptr, "transform"}, {nullptr, "converge"}, {nullptr, "counterexample"}, {nullptr, "simulate"}};
    const std::vector<std::string> help = {"Gram-matrix eigenvalue check of a kernel on grids",
                                           "Tabulate a kernel and its Markov mimic",
                                           "Partition-composed laws against a Markov target",
                                           "Weierstrass-type spectral measure and decay-rate witnesses",
                                           "Sample trajectories and compare the SDE and Gaussian routes"};
    std::map<std::string, CLI::Option*> opts;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        CLI::App* s = app.add_subcommand(subs[i].second, help[i]);
        subs[i].first = s;
        auto add = [&](const std::string& name, auto& var, const std::string& desc) {
            opts[subs[i].second + name] = s->add_option(name, var, desc);
        };
        add("--kernel", f.kernel, "kernel spec: inline JSON or a file path");
        add("--target", f.target, "target kernel spec for converge");
        add("--alpha", f.alpha, "decay rate: a number, inf, or a JSON rate spec");
        add("--grid", f.grids, "start:stop:count (repeatable)");
        add("--mesh-sequence", f.mesh, "comma-separated meshes or lattice steps, e.g. 2^-3,2^-4");
        add("--mode", f.mode, "converge: local|global; simulate: figure|cholesky|ou|em");
        add("--interval", f.interval, "s:t for local convergence");
        add("--paths", f.paths, "number of simulated paths");
        add("--seed", f.seed, "random seed");
        add("--step", f.step, "Euler-Maruyama step");
        add("--out", f.out, "output directory");
        add("--targets", f.targets, "comma-separated decay-rate targets");
        add("--i-max", f.i_max, "witness depth");
        add("--k-cut", f.k_cut, "spectral truncation index");
        add("--budget", f.budget, "index search budget");
        add("--export-paths", f.export_paths, "paths written to trajectory CSVs");
        add("--config", f.config, "JSON config file (flags take precedence)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, log, err);
            return kSuccess;
        }
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }
    std::string command;
    for (const auto& [s, name] : subs) {
        if (s->parsed()) command = name;
    }
    auto given = [&](const std::string& name) { return opts.at(command + name)->count() > 0; };

    RunConfig cfg = defaults_for(command);
    try {
        if (given("--config")) apply_config(cfg, io::load_json_argument(f.config));
        if (given("--kernel")) cfg.kernel = io::load_json_argument(f.kernel);
        if (given("--target")) cfg.target = io::load_json_argument(f.target);
        if (given("--alpha")) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(f.alpha, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == f.alpha.size() && used > 0) {
                cfg.alpha = json(v);
            } else if (f.alpha == "inf" || f.alpha == "infinite") {
                cfg.alpha = json("inf");
            } else {
                cfg.alpha = io::load_json_argument(f.alpha);
            }
        }
        if (given("--grid")) cfg.grids = f.grids;
        if (given("--mesh-sequence")) cfg.mesh_sequence = io::parse_number_list(f.mesh);
        if (given("--mode")) cfg.mode = f.mode;
        if (given("--interval")) cfg.interval = f.interval;
        if (given("--paths")) cfg.paths = f.paths;
        if (given("--seed")) cfg.seed = f.seed;
        if (given("--step")) cfg.step = f.step;
        if (given("--out")) cfg.out = f.out;
        if (given("--targets")) cfg.targets = io::parse_number_list(f.targets);
        if (given("--i-max")) cfg.i_max = f.i_max;
        if (given("--k-cut")) cfg.k_cut = f.k_cut;
        if (given("--budget")) cfg.budget = f.budget;
        if (given("--export-paths")) cfg.export_paths = f.export_paths;
    } catch (const std::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }
    return run(cfg, log, err);
}

}  // namespace gmt::cli
