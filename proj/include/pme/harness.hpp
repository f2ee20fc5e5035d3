#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pme/exact.hpp"
#include "pme/link_function.hpp"
#include "pme/rng.hpp"
#include "pme/spectral.hpp"

namespace pme {

inline constexpr const char* kVersion = "0.1.0";

/// Build identifier baked in at compile time (short git revision).
const char* build_id();

/// One Monte Carlo / exact experiment over a single ensemble family.
struct ExperimentConfig {
    std::string link;                  // "builtin:..." tag or path to a link file
    std::vector<std::size_t> sizes;    // each divisible by the link period
    std::size_t samples = 1;
    std::vector<unsigned> orders;
    EntryDistribution dist = EntryDistribution::StandardNormal;
    std::uint64_t seed = 0;
    std::string out;                   // output directory; empty = no files
    std::size_t bins = 0;              // 0 = automatic (Freedman-Diaconis, fallback 64)
    double range_lo = -3.0;
    double range_hi = 3.0;
    bool emit_spectra = false;
    unsigned threads = 1;

    static ExperimentConfig from_json(const std::string& text);
    /// Overwrites only the fields present in the document.
    void merge_json(const std::string& text);
    std::string to_json() const;
};

/// Resolves "builtin:block:<k>", "builtin:f2", "builtin:f3" or a file path.
LinkFunction load_link(const std::string& descriptor);

struct MomentRow {
    std::size_t n = 0;
    unsigned m = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::optional<ExactMoment> exact;  // absent when the exact budget is exceeded
    double abs_err = 0.0;              // |estimate - exact| when exact is present
};

struct MomentTable {
    std::vector<MomentRow> rows;

    /// CSV rows "N,m,estimate,std_error,exact_num,exact_den,abs_err"
    /// (exact columns empty when unavailable).
    void write_csv(std::ostream& out) const;
};

/// Samples the real ensemble at every configured size, estimates spectral
/// moments with standard errors, and attaches the exact companion values.
/// When cfg.out is set, writes config.json, moments.csv, histogram.csv,
/// report.json and (optionally) spectra.csv into it.
MomentTable run_mc_experiment(const ExperimentConfig& cfg);

struct CheckResult {
    std::string name;
    std::string params;
    bool pass = false;
    std::string lhs;
    std::string rhs;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    std::uint64_t seed = 0;

    bool all_pass() const;
    std::string to_json() const;
};

/// Exact verification suite over a set of link functions: dual-route moment
/// equality, companion size stability across K in {k, 2k, 3k}, odd-moment
/// vanishing, moment bounds with Carleman partial sums, and agreement of the
/// pair-compatibility table with finite-size real class maps (links with
/// period <= k_max).
VerifyReport run_verify(const std::vector<std::string>& links, std::size_t k_max, unsigned m_max);

/// The default link set for verification: block-circulant periods 1..3 plus
/// the two sample 2-periodic links.
std::vector<std::string> default_verify_links();

struct ConcentrationRow {
    std::size_t n = 0;
    unsigned m = 0;
    double fourth_central = 0.0;
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;  // grouped by order, sizes ascending
    bool strictly_decreasing = false;    // per order, along the size ladder
};

/// Fourth central moment of the order-m spectral moments across samples,
/// per size. Requires at least 3 sizes and at least 2 samples.
ConcentrationReport run_concentration(const ExperimentConfig& cfg);

}  // namespace pme
