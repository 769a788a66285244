// Command-line front end: run / benchmark / error / oracle.
//
// All heavy lifting lives in the headers; this file parses flags, loads the
// JSON config, applies overrides, and routes to the command cores.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strmc/config.hpp"
#include "strmc/oracle.hpp"
#include "strmc/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw strmc::Error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt_vec(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += strmc::fmt_g17(v[i]);
    }
    return s;
}

// Full deterministic report for a finite stratified chain: the fixed point,
// the coupling/coverage/mixing diagnostics, and the three rate bounds.
std::string oracle_report(const strmc::RunConfig& cfg) {
    using namespace strmc;
    if (cfg.kind != SystemKind::discrete)
        throw ConfigError("oracle requires a discrete system");
    const RunSetup s = make_setup(cfg);
    const FiniteStratifiedChain f(s.chain, s.sets);
    const ExactFixedPoint fp = exact_fixed_point(f);

    std::ostringstream out;
    out << "oracle report\n";
    out << "states = " << f.states() << "\n";
    out << "strata = " << f.strata_count() << "\n";
    for (int j = 0; j < f.strata_count(); ++j) {
        out << "stratum[" << j << "] =";
        for (int st : f.strata[j]) out << " " << st;
        out << "\n";
    }
    out << "pi = " << fmt_vec(fp.pi) << "\n";
    out << "a_star = " << fmt_vec(fp.a_star) << "\n";
    out << "mean_exit_time = " << fmt_vec(fp.mean_exit_time) << "\n";
    out << "mu_star = " << fmt_vec(fp.mu_star) << "\n";
    for (int j = 0; j < f.strata_count(); ++j)
        out << "nu_star[" << j << "] = " << fmt_vec(fp.nu_star[j]) << "\n";
    for (int j = 0; j < f.strata_count(); ++j)
        out << "G_star[" << j << "] = " << fmt_vec(fp.G_star[j]) << "\n";

    const double c = exit_coupling_constant(f);
    out << "coupling_c = " << fmt_g17(c) << "\n";

    const MinorizationResult plain = index_minorization(f, 40, 1.0);
    out << "coverage_plain: found = " << (plain.found ? "yes" : "no");
    if (plain.found)
        out << ", m = " << plain.m << ", u = " << fmt_g17(plain.u);
    out << "\n";
    const MinorizationResult lazy = index_minorization(f, 40, 0.5);
    out << "coverage_lazy_p0.5: found = " << (lazy.found ? "yes" : "no");
    if (lazy.found) out << ", m = " << lazy.m << ", u = " << fmt_g17(lazy.u);
    out << "\n";

    out << "contraction_check";
    try {
        const ContractionCheck chk = tv_contraction_check(f, plain.found ? 1.0 : 0.5);
        out << (plain.found ? " (plain)" : " (lazy p=0.5)") << ": violations = "
            << chk.violations << ", worst_margin = " << fmt_g17(chk.worst_margin)
            << ", m = " << chk.minorization.m << ", u = " << fmt_g17(chk.minorization.u)
            << "\n";
    } catch (const SolverError& e) {
        out << ": UNAVAILABLE (" << e.what() << ")\n";
    }

    const MixingRate mix = weight_mixing_rate(fp.G_star);
    out << "lambda = " << fmt_g17(mix.lambda) << "\n";
    out << "slem = " << fmt_g17(mix.slem) << "\n";

    const LimitingRate lim = limiting_rate(c, mix.lambda);
    out << "limiting_rate_q = " << fmt_g17(lim.q)
        << (lim.degenerate ? " (degenerate)" : "") << "\n";

    try {
        const Matrix theta = weight_log_sensitivity(fp.G_star);
        double theta_max = 0.0;
        for (const auto& row : theta)
            for (double v : row) theta_max = std::max(theta_max, v);
        const SensitivityBound sb = sensitivity_rate_bound(c, fp.a_star, theta);
        out << "theta_hat_max = " << fmt_g17(theta_max) << "\n";
        out << "sensitivity: r_infinity = " << fmt_g17(sb.r_infinity)
            << ", envelope = " << fmt_g17(sb.envelope) << ", rate = " << fmt_g17(sb.rate)
            << ", radius = " << fmt_g17(sb.radius)
            << (sb.unbounded_radius ? " (unbounded)" : "") << "\n";
    } catch (const Error& e) {
        out << "sensitivity: UNAVAILABLE (" << e.what() << ")\n";
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stratified resampling engine for metastable dynamics"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    std::vector<std::string> error_inputs;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* c = cmd->add_option("--config", config_path, "JSON config file");
        if (config_required) c->required();
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--out", out_dir, "override the output directory");
        cmd->add_option("--threads", threads, "override the trajectory thread count");
    };

    CLI::App* cmd_run_app = app.add_subcommand("run", "execute a configured stratified run");
    add_common(cmd_run_app, true);
    CLI::App* cmd_bench_app =
        app.add_subcommand("benchmark", "long un-stratified reference trajectory");
    add_common(cmd_bench_app, true);
    CLI::App* cmd_error_app = app.add_subcommand(
        "error", "error-vs-cost table from a reference histogram and one or more run dirs");
    add_common(cmd_error_app, false);
    cmd_error_app
        ->add_option("inputs", error_inputs,
                     "reference histogram file, then one or more run directories")
        ->expected(-2);
    CLI::App* cmd_oracle_app =
        app.add_subcommand("oracle", "exact fixed point and rate bounds for a finite chain");
    add_common(cmd_oracle_app, true);

    CLI11_PARSE(app, argc, argv);

    try {
        strmc::RunConfig cfg;
        if (!config_path.empty()) cfg = strmc::parse_config(read_file(config_path));
        auto apply_overrides = [&](CLI::App* cmd) {
            if (cmd->count("--seed")) cfg.seed = seed;
            if (cmd->count("--out")) cfg.out_dir = out_dir;
            if (cmd->count("--threads")) cfg.threads = threads;
            strmc::validate_config(cfg);
        };

        if (cmd_run_app->parsed()) {
            apply_overrides(cmd_run_app);
            const std::vector<std::string> dirs = strmc::cmd_run(cfg);
            for (const std::string& d : dirs) std::cout << "wrote " << d << "\n";
        } else if (cmd_bench_app->parsed()) {
            apply_overrides(cmd_bench_app);
            const std::string path = cfg.out_dir + "/benchmark.txt";
            strmc::cmd_benchmark(cfg, path);
            std::cout << "wrote " << path << "\n";
        } else if (cmd_error_app->parsed()) {
            if (error_inputs.size() < 2)
                throw strmc::Error("error: need a reference histogram and at least one run dir");
            const std::string reference = error_inputs.front();
            const std::vector<std::string> dirs(error_inputs.begin() + 1, error_inputs.end());
            const strmc::ErrorCurve curve = strmc::cmd_error(dirs, reference);
            const std::string dest = cmd_error_app->count("--out") ? out_dir : "out";
            std::filesystem::create_directories(dest);
            const strmc::WeightedHistogram ref = strmc::read_histogram(reference);
            strmc::write_error_curve(curve, ref.grid(), dest + "/error_curve.txt");
            std::cout << "wrote " << dest << "/error_curve.txt\n";
        } else if (cmd_oracle_app->parsed()) {
            apply_overrides(cmd_oracle_app);
            const std::string report = oracle_report(cfg);
            std::cout << report;
            if (cmd_oracle_app->count("--out")) {
                std::filesystem::create_directories(out_dir);
                std::ofstream f(out_dir + "/oracle_report.txt");
                f << report;
                std::cout << "wrote " << out_dir << "/oracle_report.txt\n";
            }
        }
        return 0;
    } catch (const strmc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
