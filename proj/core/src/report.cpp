#include "cne/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cne {

std::vector<double> cne_raw(const std::vector<double>& alpha_plus,
                            const std::vector<double>& u, double epsilon) {
    if (alpha_plus.size() != u.size())
        throw std::invalid_argument("cne_raw: alpha_plus/u length mismatch");
    if (!(epsilon > 0.0)) throw std::invalid_argument("cne_raw: epsilon must be > 0");
    std::vector<double> out(alpha_plus.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (alpha_plus[c] < 0.0)
            throw std::invalid_argument("cne_raw: negative alpha_plus entry");
        if (u[c] < 0.0) throw std::invalid_argument("cne_raw: negative uncertainty entry");
        out[c] = alpha_plus[c] / std::max(u[c], epsilon);
    }
    return out;
}

std::vector<double> cne_normalize(const std::vector<double>& raw) {
    if (raw.empty()) return {};
    double mn = raw[0], mx = raw[0];
    for (double v : raw) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    std::vector<double> out(raw.size());
    if (mx == mn) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double range = mx - mn;
    for (std::size_t c = 0; c < raw.size(); ++c) out[c] = (raw[c] - mn) / range;
    return out;
}

CneReport build_report(const std::vector<double>& alpha, const std::vector<double>& u,
                       const std::vector<double>& distribution,
                       const std::vector<std::string>& class_names, ReportMetadata meta) {
    const std::size_t C = alpha.size();
    if (u.size() != C || distribution.size() != C)
        throw std::invalid_argument("build_report: per-class vector lengths differ");

    const auto alpha_plus = [&] {
        std::vector<double> ap(C);
        for (std::size_t c = 0; c < C; ++c) ap[c] = std::max(alpha[c], 0.0);
        return ap;
    }();
    const auto raw = cne_raw(alpha_plus, u, meta.epsilon);

    std::vector<std::size_t> population;
    for (std::size_t c = 0; c < C; ++c)
        if (alpha[c] > 0.0) population.push_back(c);

    std::vector<double> normalized(C, 0.0);
    if (population.empty()) {
        normalized = cne_normalize(raw);  // all raw are 0: flat rule
    } else {
        std::vector<double> pop_raw;
        pop_raw.reserve(population.size());
        for (std::size_t c : population) pop_raw.push_back(raw[c]);
        const auto pop_norm = cne_normalize(pop_raw);
        for (std::size_t i = 0; i < population.size(); ++i)
            normalized[population[i]] = pop_norm[i];
    }

    CneReport report;
    report.meta = std::move(meta);
    report.rows.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        CneRow& row = report.rows[c];
        row.class_id = c;
        row.pattern = c < class_names.size() ? class_names[c] : "class_" + std::to_string(c);
        row.alpha = alpha[c];
        row.alpha_plus = alpha_plus[c];
        row.u = u[c];
        row.raw_cne = raw[c];
        row.normalized_cne = normalized[c];
        row.distribution_pct = distribution[c] * 100.0;
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const CneRow& a, const CneRow& b) {
        if (a.normalized_cne != b.normalized_cne) return a.normalized_cne > b.normalized_cne;
        if (a.raw_cne != b.raw_cne) return a.raw_cne > b.raw_cne;
        return a.class_id < b.class_id;
    });
    return report;
}

CneReport filter_patterns(const CneReport& report, double threshold) {
    if (threshold < 0.0)
        throw std::invalid_argument("filter_patterns: threshold must be >= 0");
    CneReport out;
    out.meta = report.meta;
    out.meta.filter_threshold = threshold;
    for (const auto& row : report.rows)
        if (row.alpha >= threshold) out.rows.push_back(row);
    return out;
}

namespace {

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

nlohmann::json meta_to_json(const ReportMetadata& m) {
    return {
        {"mc_runs", m.mc_runs},
        {"p_drop", m.p_drop},
        {"epsilon", m.epsilon},
        {"filter_threshold", m.filter_threshold},
        {"ece_bins", m.ece_bins},
        {"ece", m.ece_value},
        {"l2", m.l2},
        {"feature_scale", m.feature_scale},
        {"seed", m.seed},
        {"dataset_fingerprint", m.dataset_fingerprint},
    };
}

}  // namespace

void emit_report(const CneReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    nlohmann::json j;
    j["metadata"] = meta_to_json(report.meta);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({
            {"id", r.class_id},
            {"pattern", r.pattern},
            {"alpha", r.alpha},
            {"alpha_plus", r.alpha_plus},
            {"u", r.u},
            {"raw_cne", r.raw_cne},
            {"normalized_cne", r.normalized_cne},
            {"distribution_pct", r.distribution_pct},
        });
    }
    j["classes"] = rows;
    {
        std::ofstream f(dir / "report.json", std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("report: cannot write " + (dir / "report.json").string());
        f << j.dump(2) << "\n";
    }

    {
        std::ofstream f(dir / "report.csv", std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("report: cannot write " + (dir / "report.csv").string());
        f << "pattern,alpha,alpha_plus,u,raw_cne,normalized_cne,distribution_pct\n";
        for (const auto& r : report.rows) {
            f << r.pattern << ',' << fmt_full(r.alpha) << ',' << fmt_full(r.alpha_plus) << ','
              << fmt_full(r.u) << ',' << fmt_full(r.raw_cne) << ','
              << fmt_full(r.normalized_cne) << ',' << fmt_full(r.distribution_pct) << "\n";
        }
    }

    {
        std::size_t name_w = 7;  // "Pattern"
        for (const auto& r : report.rows) name_w = std::max(name_w, r.pattern.size());
        std::ofstream f(dir / "report.txt", std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("report: cannot write " + (dir / "report.txt").string());
        auto pad = [&](const std::string& s) {
            return s + std::string(name_w - s.size() + 2, ' ');
        };
        f << pad("Pattern") << "Metric  Distribution%\n";
        for (const auto& r : report.rows) {
            const std::string metric = fmt_metric(r.normalized_cne);
            f << pad(r.pattern) << metric << std::string(8 - metric.size(), ' ')
              << fmt_pct(r.distribution_pct) << "\n";
        }
    }
}

CneReport load_report(const std::filesystem::path& json_path) {
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("report: cannot open " + json_path.string());
    nlohmann::json j;
    f >> j;
    CneReport report;
    const auto& m = j.at("metadata");
    report.meta.mc_runs = m.at("mc_runs").get<std::size_t>();
    report.meta.p_drop = m.at("p_drop").get<double>();
    report.meta.epsilon = m.at("epsilon").get<double>();
    report.meta.filter_threshold = m.at("filter_threshold").get<double>();
    report.meta.ece_bins = m.at("ece_bins").get<std::size_t>();
    report.meta.ece_value = m.at("ece").get<double>();
    report.meta.l2 = m.at("l2").get<double>();
    report.meta.feature_scale = m.at("feature_scale").get<double>();
    report.meta.seed = m.at("seed").get<std::uint64_t>();
    report.meta.dataset_fingerprint = m.at("dataset_fingerprint").get<std::string>();
    for (const auto& rj : j.at("classes")) {
        CneRow r;
        r.class_id = rj.at("id").get<std::size_t>();
        r.pattern = rj.at("pattern").get<std::string>();
        r.alpha = rj.at("alpha").get<double>();
        r.alpha_plus = rj.at("alpha_plus").get<double>();
        r.u = rj.at("u").get<double>();
        r.raw_cne = rj.at("raw_cne").get<double>();
        r.normalized_cne = rj.at("normalized_cne").get<double>();
        r.distribution_pct = rj.at("distribution_pct").get<double>();
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::string file_fingerprint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("fingerprint: cannot open " + path.string());
    std::uint64_t h = 0xCBF29CE484222325ull;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cne
