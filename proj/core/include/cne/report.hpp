#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cne {

struct ReportMetadata {
    std::size_t mc_runs = 25;
    double p_drop = 0.1;
    double epsilon = 1e-9;
    double filter_threshold = 0.01;
    std::size_t ece_bins = 15;
    double ece_value = 0.0;
    double l2 = 1e-3;
    double feature_scale = 1.0;
    std::uint64_t seed = 0;
    std::string dataset_fingerprint;
};

struct CneRow {
    std::size_t class_id = 0;
    std::string pattern;
    double alpha = 0.0;
    double alpha_plus = 0.0;
    double u = 0.0;
    double raw_cne = 0.0;
    double normalized_cne = 0.0;
    double distribution_pct = 0.0;
};

struct CneReport {
    ReportMetadata meta;
    std::vector<CneRow> rows;  // sorted by normalized_cne descending
};

// raw_c = alpha_plus_c / max(u_c, epsilon). The epsilon guard keeps a
// perfectly certain positive pattern finite and at the top of the ranking.
std::vector<double> cne_raw(const std::vector<double>& alpha_plus,
                            const std::vector<double>& u, double epsilon = 1e-9);

// (raw_c - min) / (max - min); a constant vector maps to all 0.5.
std::vector<double> cne_normalize(const std::vector<double>& raw);

// Assembles rows for all classes. Min-max normalization runs over the classes
// with alpha > 0; classes outside that population get normalized value 0.
// When no class has positive alpha, all raw values are 0 and the flat rule
// applies (all 0.5). Rows come out sorted by normalized_cne descending
// (ties: raw descending, then class id).
CneReport build_report(const std::vector<double>& alpha, const std::vector<double>& u,
                       const std::vector<double>& distribution,
                       const std::vector<std::string>& class_names, ReportMetadata meta);

// Drops rows whose alpha (the pre-clipping coefficient, in scaled-feature
// units) is below the threshold. Normalization is not recomputed: it was
// already taken over the positive-coefficient population.
CneReport filter_patterns(const CneReport& report, double threshold);

// Writes report.json, report.csv and report.txt into the directory.
void emit_report(const CneReport& report, const std::filesystem::path& dir);

CneReport load_report(const std::filesystem::path& json_path);

// FNV-1a 64 over a file's bytes, as a hex string; fingerprints datasets.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace cne
