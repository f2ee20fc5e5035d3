#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pme/exact.hpp"
#include "pme/harness.hpp"
#include "pme/sampler.hpp"
#include "pme/spectral.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string link;
    std::string config_path;
    std::vector<std::size_t> sizes;
    std::size_t samples = 200;
    std::vector<unsigned> orders;
    std::string dist = "standard-normal";
    std::uint64_t seed = 0;
    std::string out;
    std::size_t bins = 0;
    std::vector<double> range;
    bool emit_spectra = false;
    unsigned threads = 1;
};

bool flag_passed(const CLI::App* cmd, const std::string& name) {
    const auto* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

// Defaults, then the config file, then explicitly passed flags.
pme::ExperimentConfig build_config(const CommonFlags& flags, const CLI::App* cmd) {
    pme::ExperimentConfig cfg;
    cfg.samples = 200;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path, std::ios::binary);
        if (!in) throw std::invalid_argument("cannot open config file: " + flags.config_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        cfg.merge_json(buffer.str());
    }
    if (flag_passed(cmd, "--link")) cfg.link = flags.link;
    if (flag_passed(cmd, "--sizes")) cfg.sizes = flags.sizes;
    if (flag_passed(cmd, "--samples")) cfg.samples = flags.samples;
    if (flag_passed(cmd, "--orders")) cfg.orders = flags.orders;
    if (flag_passed(cmd, "--dist")) cfg.dist = pme::parse_distribution(flags.dist);
    if (flag_passed(cmd, "--seed")) cfg.seed = flags.seed;
    if (flag_passed(cmd, "--out")) cfg.out = flags.out;
    if (flag_passed(cmd, "--bins")) cfg.bins = flags.bins;
    if (flag_passed(cmd, "--range")) {
        if (flags.range.size() != 2)
            throw std::invalid_argument("--range needs exactly two values: lo hi");
        cfg.range_lo = flags.range[0];
        cfg.range_hi = flags.range[1];
    }
    if (flag_passed(cmd, "--emit-spectra")) cfg.emit_spectra = flags.emit_spectra;
    if (flag_passed(cmd, "--threads")) cfg.threads = flags.threads;
    if (cfg.link.empty()) throw std::invalid_argument("--link is required");
    return cfg;
}

void add_link_flag(CLI::App* cmd, CommonFlags& flags, bool required = true) {
    auto* opt = cmd->add_option("--link", flags.link,
                                "link descriptor: builtin:block:<k>, builtin:f2, builtin:f3, or a "
                                "JSON link file path");
    if (required) opt->required();
}

int cmd_link_check(const CommonFlags& flags) {
    try {
        const pme::LinkFunction f = pme::load_link(flags.link);
        std::cout << "ok: k=" << f.k() << " " << f.serialize() << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid link: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}

int cmd_sample(const CommonFlags& flags, const CLI::App* cmd, const std::string& kind) {
    pme::ExperimentConfig cfg = build_config(flags, cmd);
    if (cfg.sizes.size() != 1)
        throw std::invalid_argument("sample: exactly one --size is required");
    std::cerr << "master seed: " << cfg.seed << "\n";
    const pme::LinkFunction f = pme::load_link(cfg.link);
    const std::size_t n = cfg.sizes[0];

    const pme::EntryClassMap map = kind == "companion" ? pme::build_companion_classes(f, n)
                                                       : pme::build_real_classes(f, n);
    std::vector<double> pooled;
    std::string spectra_csv = "sample_index,eig_index,value\n";
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        std::vector<double> eigs;
        if (kind == "companion") {
            const auto matrix = pme::sample_companion_matrix(map, cfg.seed, s);
            eigs = pme::hermitian_eigenvalues(matrix.entries);
        } else {
            const auto matrix = pme::sample_real_matrix(map, cfg.dist, cfg.seed, s);
            eigs = pme::hermitian_eigenvalues(matrix.entries);
        }
        const pme::SpectralSample spectrum = pme::normalized_spectrum(eigs, n);
        char line[96];
        for (std::size_t e = 0; e < spectrum.values.size(); ++e) {
            std::snprintf(line, sizeof line, "%zu,%zu,%.17g\n", s, e, spectrum.values[e]);
            spectra_csv += line;
        }
        pooled.insert(pooled.end(), spectrum.values.begin(), spectrum.values.end());
    }
    const std::size_t bins =
        cfg.bins > 0 ? cfg.bins : pme::fd_bin_count(pooled, cfg.range_lo, cfg.range_hi);
    const pme::HistogramTable hist = pme::histogram(pooled, bins, cfg.range_lo, cfg.range_hi);
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream hist_out(std::filesystem::path(cfg.out) / "histogram.csv");
        pme::write_histogram_csv(hist, hist_out);
        std::ofstream spectra_out(std::filesystem::path(cfg.out) / "spectra.csv");
        spectra_out << spectra_csv;
        std::cout << "wrote " << cfg.out << "/histogram.csv and spectra.csv\n";
    } else {
        std::ostringstream text;
        pme::write_histogram_csv(hist, text);
        std::cout << text.str();
    }
    return kExitOk;
}

int cmd_moments_exact(const CommonFlags& flags, const std::string& method, unsigned workers) {
    const pme::LinkFunction f = pme::load_link(flags.link);
    const std::size_t K = flags.sizes.empty() ? f.k() : flags.sizes[0];
    std::vector<unsigned> orders = flags.orders;
    if (orders.empty()) orders = {2, 4, 6, 8};

    if (method == "matching" && K != f.k())
        throw std::invalid_argument("moments exact: the matching route is defined at K = k only");

    nlohmann::json report;
    report["link"] = f.descriptor();
    report["K"] = K;
    report["method"] = method;
    report["orders"] = nlohmann::json::array();
    const auto start = std::chrono::steady_clock::now();
    for (const unsigned m : orders) {
        const pme::ExactMoment value = method == "matching"
                                           ? pme::limit_moment_via_matchings(f, m)
                                           : pme::companion_moment_exact(
                                                 f, K, m, pme::PatternMode::CyclicReduced, workers);
        report["orders"].push_back({{"m", m},
                                    {"numerator", value.numerator().str()},
                                    {"denominator", value.denominator().str()},
                                    {"decimal", value.to_double()}});
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    report["elapsed_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();

    const std::string text = report.dump(2) + "\n";
    if (!flags.out.empty()) {
        std::filesystem::create_directories(flags.out);
        std::ofstream out(std::filesystem::path(flags.out) / "exact_moments.json");
        out << text;
        std::cout << "wrote " << flags.out << "/exact_moments.json\n";
    } else {
        std::cout << text;
    }
    return kExitOk;
}

int cmd_moments_mc(const CommonFlags& flags, const CLI::App* cmd) {
    const pme::ExperimentConfig cfg = build_config(flags, cmd);
    std::cerr << "master seed: " << cfg.seed << "\n";
    const pme::MomentTable table = pme::run_mc_experiment(cfg);
    std::ostringstream csv;
    table.write_csv(csv);
    std::cout << csv.str();
    if (!cfg.out.empty()) std::cout << "wrote run files to " << cfg.out << "\n";
    return kExitOk;
}

int cmd_verify(const std::vector<std::string>& links, std::size_t k_max, unsigned m_max,
               const std::string& out) {
    const auto link_set = links.empty() ? pme::default_verify_links() : links;
    const pme::VerifyReport report = pme::run_verify(link_set, k_max, m_max);
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << " (" << check.params
                  << "): " << check.lhs << " vs " << check.rhs << "\n";
    }
    std::cout << (report.all_pass() ? "all checks passed" : "some checks FAILED") << " ("
              << report.checks.size() << " checks)\n";
    if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::ofstream json_out(std::filesystem::path(out) / "report.json");
        json_out << report.to_json() << "\n";
    }
    return report.all_pass() ? kExitOk : kExitCheckFailure;
}

int cmd_concentration(const CommonFlags& flags, const CLI::App* cmd) {
    pme::ExperimentConfig cfg = build_config(flags, cmd);
    if (cfg.orders.empty()) cfg.orders = {4};
    std::cerr << "master seed: " << cfg.seed << "\n";
    const pme::ConcentrationReport report = pme::run_concentration(cfg);
    std::cout << "N,m,fourth_central_moment\n";
    for (const auto& row : report.rows) {
        std::cout << row.n << ',' << row.m << ',' << row.fourth_central << "\n";
    }
    std::cout << (report.strictly_decreasing ? "strictly decreasing: yes"
                                             : "strictly decreasing: NO")
              << "\n";
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream out(std::filesystem::path(cfg.out) / "concentration.csv");
        out << "N,m,fourth_central_moment\n";
        for (const auto& row : report.rows)
            out << row.n << ',' << row.m << ',' << row.fourth_central << "\n";
    }
    return report.strictly_decreasing ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic matrix ensembles: exact companion moments and Monte Carlo spectra"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pme::kVersion));

    CommonFlags flags;

    auto* link_cmd = app.add_subcommand("link", "link-function utilities");
    link_cmd->require_subcommand(1);
    auto* link_check = link_cmd->add_subcommand("check", "validate a link descriptor or file");
    add_link_flag(link_check, flags);

    auto* sample_cmd = app.add_subcommand("sample", "sample matrices and write spectra/histograms");
    add_link_flag(sample_cmd, flags);
    sample_cmd->add_option("--size,--sizes", flags.sizes, "matrix size N (multiple of k)");
    sample_cmd->add_option("--samples", flags.samples, "number of matrices")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--dist", flags.dist,
                           "entry distribution: standard-normal|rademacher|uniform-scaled");
    sample_cmd->add_option("--seed", flags.seed, "master seed");
    sample_cmd->add_option("--out", flags.out, "output directory");
    sample_cmd->add_option("--bins", flags.bins, "histogram bins (0 = automatic)");
    sample_cmd->add_option("--range", flags.range, "histogram range: lo hi")->expected(2);
    std::string sample_kind = "real";
    sample_cmd->add_option("--kind", sample_kind, "ensemble kind: real|companion")
        ->check(CLI::IsMember({"real", "companion"}));

    auto* moments_cmd = app.add_subcommand("moments", "spectral moments, exact or Monte Carlo");
    moments_cmd->require_subcommand(1);

    auto* exact_cmd = moments_cmd->add_subcommand("exact", "exact companion moments");
    add_link_flag(exact_cmd, flags);
    exact_cmd->add_option("--size,--sizes", flags.sizes, "companion size K (default: k)");
    exact_cmd->add_option("--orders", flags.orders, "moment orders (default: 2 4 6 8)");
    exact_cmd->add_option("--out", flags.out, "output directory for exact_moments.json");
    std::string exact_method = "isserlis";
    exact_cmd->add_option("--method", exact_method, "computation route: isserlis|matching")
        ->check(CLI::IsMember({"isserlis", "matching"}));
    unsigned exact_workers = 1;
    exact_cmd->add_option("--threads", exact_workers, "worker threads for the tuple sum");

    auto* mc_cmd = moments_cmd->add_subcommand("mc", "Monte Carlo moment estimates");
    add_link_flag(mc_cmd, flags, false);
    mc_cmd->add_option("--config", flags.config_path, "JSON config file (flags override)");
    mc_cmd->add_option("--size,--sizes", flags.sizes, "matrix sizes (multiples of k)");
    mc_cmd->add_option("--samples", flags.samples, "samples per size")->check(CLI::PositiveNumber);
    mc_cmd->add_option("--orders", flags.orders, "moment orders");
    mc_cmd->add_option("--dist", flags.dist,
                       "entry distribution: standard-normal|rademacher|uniform-scaled");
    mc_cmd->add_option("--seed", flags.seed, "master seed");
    mc_cmd->add_option("--out", flags.out, "output directory");
    mc_cmd->add_option("--bins", flags.bins, "histogram bins (0 = automatic)");
    mc_cmd->add_option("--range", flags.range, "histogram range: lo hi")->expected(2);
    mc_cmd->add_flag("--emit-spectra", flags.emit_spectra, "also write spectra.csv");
    mc_cmd->add_option("--threads", flags.threads, "sampling worker threads");

    auto* verify_cmd = app.add_subcommand("verify", "exact verification suite");
    std::vector<std::string> verify_links;
    verify_cmd->add_option("--link", verify_links,
                           "link descriptors to verify (default: the five builtins)");
    std::size_t verify_kmax = 4;
    unsigned verify_mmax = 8;
    verify_cmd->add_option("--kmax", verify_kmax,
                           "largest period for the quadruple compatibility scan");
    verify_cmd->add_option("--orders", verify_mmax, "highest moment order to check");
    verify_cmd->add_option("--out", flags.out, "output directory for report.json");

    auto* conc_cmd = app.add_subcommand("concentration", "moment concentration across sizes");
    add_link_flag(conc_cmd, flags);
    conc_cmd->add_option("--sizes", flags.sizes, "size ladder (at least 3)")->required();
    conc_cmd->add_option("--samples", flags.samples, "samples per size")->check(CLI::PositiveNumber);
    conc_cmd->add_option("--orders", flags.orders, "moment orders (default: 4)");
    conc_cmd->add_option("--dist", flags.dist,
                         "entry distribution: standard-normal|rademacher|uniform-scaled");
    conc_cmd->add_option("--seed", flags.seed, "master seed");
    conc_cmd->add_option("--out", flags.out, "output directory");
    conc_cmd->add_option("--threads", flags.threads, "sampling worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (link_check->parsed()) return cmd_link_check(flags);
        if (sample_cmd->parsed()) return cmd_sample(flags, sample_cmd, sample_kind);
        if (exact_cmd->parsed()) return cmd_moments_exact(flags, exact_method, exact_workers);
        if (mc_cmd->parsed()) return cmd_moments_mc(flags, mc_cmd);
        if (verify_cmd->parsed())
            return cmd_verify(verify_links, verify_kmax, verify_mmax, flags.out);
        if (conc_cmd->parsed()) return cmd_concentration(flags, conc_cmd);
    } catch (const pme::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailure;
    }
    return kExitUsage;
}
