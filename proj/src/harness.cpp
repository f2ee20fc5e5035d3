#include "pme/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "pme/sampler.hpp"

#ifndef PME_BUILD_ID
#define PME_BUILD_ID "unknown"
#endif

namespace pme {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require(bool cond, const std::string& message) {
    if (!cond) throw std::invalid_argument(message);
}

nlohmann::json config_to_json_object(const ExperimentConfig& cfg) {
    nlohmann::json doc;
    doc["link"] = cfg.link;
    doc["sizes"] = cfg.sizes;
    doc["samples"] = cfg.samples;
    doc["orders"] = cfg.orders;
    doc["dist"] = to_string(cfg.dist);
    doc["seed"] = cfg.seed;
    doc["out"] = cfg.out;
    doc["bins"] = cfg.bins;
    doc["range"] = {cfg.range_lo, cfg.range_hi};
    doc["emit_spectra"] = cfg.emit_spectra;
    doc["threads"] = cfg.threads;
    return doc;
}

nlohmann::json versions_object() {
    return {{"pme", kVersion}, {"build", build_id()}};
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Per-sample spectral statistics for one ensemble size, sampled in index
// order (workers only change scheduling, never results).
struct SizeRun {
    std::vector<std::vector<double>> moments_by_order;  // [order][sample]
    std::vector<double> pooled_values;                  // normalized eigenvalues
    std::vector<std::vector<double>> spectra;           // [sample] eigenvalues, if kept
};

SizeRun run_size(const LinkFunction& f, std::size_t n, const ExperimentConfig& cfg,
                 bool keep_spectra) {
    const EntryClassMap map = build_real_classes(f, n);
    const std::size_t samples = cfg.samples;

    std::vector<std::vector<double>> per_sample(samples);
    const auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const SampledRealMatrix matrix = sample_real_matrix(map, cfg.dist, cfg.seed, s);
            const SpectralSample spectrum =
                normalized_spectrum(hermitian_eigenvalues(matrix.entries), n, matrix.provenance);
            per_sample[s] = spectrum.values;
        }
    };
    const unsigned workers =
        std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(samples)));
    if (workers == 1) {
        worker(0, samples);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    worker(samples * w / workers, samples * (w + 1) / workers);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& error : errors)
            if (error) std::rethrow_exception(error);
    }

    SizeRun run;
    run.moments_by_order.assign(cfg.orders.size(), std::vector<double>(samples, 0.0));
    for (std::size_t s = 0; s < samples; ++s) {
        const SpectralSample spectrum{n, per_sample[s], {}};
        for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
            run.moments_by_order[o][s] = spectral_moment(spectrum, cfg.orders[o]);
        }
        run.pooled_values.insert(run.pooled_values.end(), per_sample[s].begin(),
                                 per_sample[s].end());
    }
    if (keep_spectra) run.spectra = std::move(per_sample);
    return run;
}

struct MeanError {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanError mean_and_error(const std::vector<double>& values) {
    const auto count = static_cast<double>(values.size());
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= count;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double sample_var = ss / (count - 1.0);
    return {mean, std::sqrt(sample_var / count)};
}

}  // namespace

const char* build_id() { return PME_BUILD_ID; }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    ExperimentConfig cfg;
    cfg.merge_json(text);
    return cfg;
}

void ExperimentConfig::merge_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    try {
        if (doc.contains("link")) link = doc["link"].get<std::string>();
        if (doc.contains("sizes")) sizes = doc["sizes"].get<std::vector<std::size_t>>();
        if (doc.contains("samples")) samples = doc["samples"].get<std::size_t>();
        if (doc.contains("orders")) orders = doc["orders"].get<std::vector<unsigned>>();
        if (doc.contains("dist")) dist = parse_distribution(doc["dist"].get<std::string>());
        if (doc.contains("seed")) seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("out")) out = doc["out"].get<std::string>();
        if (doc.contains("bins")) bins = doc["bins"].get<std::size_t>();
        if (doc.contains("range")) {
            range_lo = doc["range"].at(0).get<double>();
            range_hi = doc["range"].at(1).get<double>();
        }
        if (doc.contains("emit_spectra")) emit_spectra = doc["emit_spectra"].get<bool>();
        if (doc.contains("threads")) threads = doc["threads"].get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad field: ") + e.what());
    }
}

std::string ExperimentConfig::to_json() const { return config_to_json_object(*this).dump(2); }

LinkFunction load_link(const std::string& descriptor) {
    if (descriptor.rfind("builtin:", 0) == 0) {
        const std::string name = descriptor.substr(8);
        if (name == "f2") return LinkFunction::example_f2();
        if (name == "f3") return LinkFunction::example_f3();
        if (name.rfind("block:", 0) == 0) {
            const std::string arg = name.substr(6);
            std::size_t pos = 0;
            unsigned long k = 0;
            try {
                k = std::stoul(arg, &pos);
            } catch (const std::exception&) {
                throw std::invalid_argument("bad builtin link period: " + descriptor);
            }
            if (pos != arg.size() || k == 0 || k > 4096)
                throw std::invalid_argument("bad builtin link period: " + descriptor);
            return LinkFunction::block_circulant(k);
        }
        throw std::invalid_argument("unknown builtin link: " + descriptor);
    }
    std::ifstream in(descriptor, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open link file: " + descriptor);
    std::stringstream buffer;
    buffer << in.rdbuf();
    LinkFunction f = LinkFunction::parse(buffer.str());
    f.set_descriptor(descriptor);
    return f;
}

void MomentTable::write_csv(std::ostream& out) const {
    out << "N,m,estimate,std_error,exact_num,exact_den,abs_err\n";
    for (const auto& row : rows) {
        out << row.n << ',' << row.m << ',' << format_double(row.estimate) << ','
            << format_double(row.std_error) << ',';
        if (row.exact) {
            out << row.exact->numerator().str() << ',' << row.exact->denominator().str() << ','
                << format_double(row.abs_err);
        } else {
            out << ",,";
        }
        out << '\n';
    }
}

MomentTable run_mc_experiment(const ExperimentConfig& cfg) {
    const LinkFunction f = load_link(cfg.link);
    require(!cfg.sizes.empty(), "config: at least one size is required");
    require(cfg.samples >= 1, "config: samples must be >= 1");
    require(!cfg.orders.empty(), "config: at least one moment order is required");
    require(cfg.range_lo < cfg.range_hi, "config: histogram range must satisfy lo < hi");
    for (const std::size_t n : cfg.sizes) {
        require(n > 0 && n % f.k() == 0, "config: size " + std::to_string(n) +
                                             " is not a positive multiple of the period " +
                                             std::to_string(f.k()));
    }

    // Exact companion values, shared by every size (the companion moment does
    // not depend on which multiple of k realizes it).
    std::vector<std::optional<ExactMoment>> exact(cfg.orders.size());
    for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
        try {
            exact[o] = companion_moment_exact(f, f.k(), cfg.orders[o]);
        } catch (const BudgetError& e) {
            std::cerr << "warning: exact moment of order " << cfg.orders[o]
                      << " skipped: " << e.what() << "\n";
        }
    }

    MomentTable table;
    std::string spectra_csv = "sample_index,eig_index,value\n";
    HistogramTable hist;
    const std::size_t max_n = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
    bool emitted_largest = false;
    for (const std::size_t n : cfg.sizes) {
        const SizeRun run = run_size(f, n, cfg, cfg.emit_spectra);
        for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
            MomentRow row;
            row.n = n;
            row.m = cfg.orders[o];
            if (row.m == 0) {
                row.estimate = 1.0;
                row.std_error = 0.0;
            } else {
                const MeanError me = mean_and_error(run.moments_by_order[o]);
                row.estimate = me.mean;
                row.std_error = me.std_error;
            }
            row.exact = exact[o];
            if (row.exact) row.abs_err = std::abs(row.estimate - row.exact->to_double());
            table.rows.push_back(std::move(row));
        }
        // Histogram (and optional spectra) reflect the largest configured
        // size, the closest finite slice to the limit law.
        if (n == max_n && !emitted_largest) {
            emitted_largest = true;
            const std::size_t bins =
                cfg.bins > 0 ? cfg.bins
                             : fd_bin_count(run.pooled_values, cfg.range_lo, cfg.range_hi);
            hist = histogram(run.pooled_values, bins, cfg.range_lo, cfg.range_hi);
            if (cfg.emit_spectra) {
                for (std::size_t s = 0; s < run.spectra.size(); ++s) {
                    for (std::size_t e = 0; e < run.spectra[s].size(); ++e) {
                        spectra_csv += std::to_string(s);
                        spectra_csv += ',';
                        spectra_csv += std::to_string(e);
                        spectra_csv += ',';
                        spectra_csv += format_double(run.spectra[s][e]);
                        spectra_csv += '\n';
                    }
                }
            }
        }
    }

    if (!cfg.out.empty()) {
        const std::filesystem::path dir(cfg.out);
        std::filesystem::create_directories(dir);
        write_file(dir / "config.json", config_to_json_object(cfg).dump(2) + "\n");
        std::ostringstream moments;
        table.write_csv(moments);
        write_file(dir / "moments.csv", moments.str());
        std::ostringstream hist_csv;
        write_histogram_csv(hist, hist_csv);
        write_file(dir / "histogram.csv", hist_csv.str());
        if (cfg.emit_spectra) write_file(dir / "spectra.csv", spectra_csv);
        nlohmann::json report;
        report["checks"] = nlohmann::json::array();
        report["seed"] = cfg.seed;
        report["versions"] = versions_object();
        write_file(dir / "report.json", report.dump(2) + "\n");
    }
    return table;
}

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerifyReport::to_json() const {
    nlohmann::json doc;
    doc["checks"] = nlohmann::json::array();
    for (const auto& check : checks) {
        doc["checks"].push_back({{"name", check.name},
                                 {"params", check.params},
                                 {"pass", check.pass},
                                 {"lhs", check.lhs},
                                 {"rhs", check.rhs}});
    }
    doc["seed"] = seed;
    doc["versions"] = versions_object();
    return doc.dump(2);
}

std::vector<std::string> default_verify_links() {
    return {"builtin:block:1", "builtin:block:2", "builtin:block:3", "builtin:f2", "builtin:f3"};
}

VerifyReport run_verify(const std::vector<std::string>& links, std::size_t k_max, unsigned m_max) {
    VerifyReport report;
    const auto add = [&](std::string name, std::string params, bool pass, std::string lhs,
                         std::string rhs) {
        report.checks.push_back(
            {std::move(name), std::move(params), pass, std::move(lhs), std::move(rhs)});
    };

    for (const std::string& descriptor : links) {
        const LinkFunction f = load_link(descriptor);
        const std::size_t k = f.k();

        // (a) dual-route equality, odd orders vanishing along the way
        for (unsigned m = 1; m <= m_max; ++m) {
            const ExactMoment via_isserlis = companion_moment_exact(f, k, m);
            const ExactMoment via_matchings = limit_moment_via_matchings(f, m);
            add(m % 2 == 0 ? "oracle_equivalence" : "odd_moment_vanishing",
                "link=" + descriptor + ",m=" + std::to_string(m),
                via_isserlis == via_matchings &&
                    (m % 2 == 0 || via_isserlis.value() == 0),
                via_isserlis.to_string(), via_matchings.to_string());
        }

        // (b) companion size stability
        for (std::size_t t : {std::size_t{2}, std::size_t{3}}) {
            for (unsigned m = 2; m <= std::min(m_max, 6u); m += 2) {
                const ExactMoment base = companion_moment_exact(f, k, m);
                const ExactMoment scaled = companion_moment_exact(f, t * k, m);
                add("size_stability",
                    "link=" + descriptor + ",K=" + std::to_string(t * k) + ",m=" +
                        std::to_string(m),
                    base == scaled, base.to_string(), scaled.to_string());
            }
        }

        // (d) moment bound
        for (unsigned m = 2; m <= m_max; m += 2) {
            const ExactMoment value = companion_moment_exact(f, k, m);
            const BigInt bound = moment_bound(k, m);
            add("moment_bound", "link=" + descriptor + ",m=" + std::to_string(m),
                value.value() <= BigRational(bound), value.to_string(), bound.str());
        }

        // (d) Carleman partial sums strictly increasing
        {
            const auto sums = carleman_partial_sums(k, 50);
            bool increasing = true;
            for (std::size_t i = 1; i < sums.size(); ++i)
                if (!(sums[i] > sums[i - 1])) increasing = false;
            add("carleman_divergence", "link=" + descriptor + ",orders=2..100", increasing,
                format_double(sums.front()), format_double(sums.back()));
        }

        // (a') the diagonal pattern order matters: the two sample 2-periodic
        // links share diagonal frequencies but separate at order 4
        if (descriptor == "builtin:f3" &&
            std::find(links.begin(), links.end(), "builtin:f2") != links.end()) {
            const ExactMoment lhs = companion_moment_exact(load_link("builtin:f2"), 2, 4);
            const ExactMoment rhs = companion_moment_exact(f, 2, 4);
            add("pattern_order_matters", "links=builtin:f2,builtin:f3,m=4", lhs != rhs,
                lhs.to_string(), rhs.to_string());
        }

        // (e) pair compatibility against the finite-size real class map,
        // every quadruple on its own generic diagonal
        if (k <= k_max) {
            const PairCompatibility compat(f);
            const std::size_t n = k * 7;
            const EntryClassMap map = build_real_classes(f, n);
            bool agree = true;
            std::string witness = "all quadruples";
            for (std::uint32_t r_l = 0; r_l < k && agree; ++r_l)
                for (std::uint32_t r_l1 = 0; r_l1 < k && agree; ++r_l1)
                    for (std::uint32_t r_t = 0; r_t < k && agree; ++r_t)
                        for (std::uint32_t r_t1 = 0; r_t1 < k && agree; ++r_t1) {
                            const std::size_t delta = (r_l1 + k - r_l) % k;
                            const bool negation = (r_t1 + k - r_t) % k == (k - delta) % k;
                            const bool predicted = compat.ok(r_l, r_l1, r_t, r_t1);
                            if (!negation) {
                                if (predicted) {
                                    agree = false;
                                    witness = "negation-violating quadruple accepted";
                                }
                                continue;
                            }
                            // every generic diagonal congruent to delta
                            for (std::size_t d = 1; d < n && agree; ++d) {
                                if (d % k != delta % k || d == 0 || 2 * d == n) continue;
                                const std::size_t i = r_l;
                                const std::size_t j = (i + d) % n;
                                const std::size_t i2 = r_t;
                                const std::size_t j2 = (i2 + n - d) % n;
                                const bool same_class =
                                    map.at(i, j).class_id == map.at(i2, j2).class_id;
                                if (same_class != predicted) {
                                    agree = false;
                                    witness = "(" + std::to_string(r_l) + "," +
                                              std::to_string(r_l1) + "," + std::to_string(r_t) +
                                              "," + std::to_string(r_t1) +
                                              ") at d=" + std::to_string(d);
                                }
                            }
                        }
            add("pair_compatibility_finite_n", "link=" + descriptor + ",N=" + std::to_string(n),
                agree, witness, "class-map agreement");
        }
    }
    return report;
}

ConcentrationReport run_concentration(const ExperimentConfig& cfg) {
    const LinkFunction f = load_link(cfg.link);
    require(cfg.sizes.size() >= 3, "concentration: need at least 3 sizes");
    require(cfg.samples >= 2, "concentration: need at least 2 samples to estimate central moments");
    require(!cfg.orders.empty(), "concentration: at least one moment order is required");
    for (const std::size_t n : cfg.sizes) {
        require(n > 0 && n % f.k() == 0, "concentration: size " + std::to_string(n) +
                                             " is not a positive multiple of the period " +
                                             std::to_string(f.k()));
    }

    std::vector<std::size_t> sizes = cfg.sizes;
    std::sort(sizes.begin(), sizes.end());

    ConcentrationReport report;
    report.strictly_decreasing = true;
    std::vector<std::vector<double>> by_order(cfg.orders.size());
    for (const std::size_t n : sizes) {
        ExperimentConfig one = cfg;
        one.sizes = {n};
        const SizeRun run = run_size(f, n, one, false);
        for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
            const unsigned m = cfg.orders[o];
            double fourth = 0.0;
            if (m > 0) {
                const auto& values = run.moments_by_order[o];
                double mean = 0.0;
                for (const double v : values) mean += v;
                mean /= static_cast<double>(values.size());
                for (const double v : values) {
                    const double d = v - mean;
                    fourth += d * d * d * d;
                }
                fourth /= static_cast<double>(values.size());
            }
            by_order[o].push_back(fourth);
            report.rows.push_back({n, m, fourth});
        }
    }
    for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
        if (cfg.orders[o] == 0) continue;  // identically zero sequence
        for (std::size_t i = 1; i < by_order[o].size(); ++i) {
            if (!(by_order[o][i] < by_order[o][i - 1])) report.strictly_decreasing = false;
        }
    }
    return report;
}

}  // namespace pme
