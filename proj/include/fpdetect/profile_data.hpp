#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/matrix.hpp"
#include "fpdetect/stats.hpp"

namespace fpdetect {

// ---------------------------------------------------------------------------
// Feature schema
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFeatureCount = 15;

struct FeatureInfo {
    const char* name;
    double max_value;    // observed maximum across the reference dataset
    bool is_flag;        // presence flag, value in {0,1}
    double clamp;        // ingestion cap (<0 means none)
    int legit_count;     // profiles where the feature is present (legit set)
    double legit_average; // normalized feature average over the legit set
};

/// Static feature table: capture limits, presence flags, and the published
/// legitimate-profile statistics used for synthetic calibration.
inline const std::array<FeatureInfo, kFeatureCount>& feature_table() {
    static const std::array<FeatureInfo, kFeatureCount> table = {{
        {"No_Languages", 5, false, -1, 15, 0.135},
        {"Profile_Summary", 1, true, -1, 21, 0.525},
        {"No_Edu_Qualification", 7, false, -1, 30, 0.275},
        {"No_Connections", 500, false, 500, 39, 0.741},
        {"No_Recommendation", 37, false, -1, 23, 0.101},
        {"Web_Site_URL", 1, true, -1, 15, 0.375},
        {"No_Skills", 50, false, 50, 30, 0.389},
        {"No_Professions", 16, false, -1, 34, 0.283},
        {"Profile_Image", 1, true, -1, 34, 0.85},
        {"No_Awards", 10, false, -1, 11, 0.087},
        {"Interests", 1, true, -1, 14, 0.35},
        {"No_LinkedIn_Groups", 51, false, -1, 25, 0.232},
        {"No_Publications", 16, false, -1, 8, 0.072},
        {"No_Projects", 7, false, -1, 7, 0.071},
        {"No_Certificates", 9, false, -1, 6, 0.056},
    }};
    return table;
}

inline std::vector<std::string> feature_names() {
    std::vector<std::string> names;
    names.reserve(kFeatureCount);
    for (const auto& f : feature_table()) names.emplace_back(f.name);
    return names;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ProfileRecord {
    std::string profile_id;
    std::array<double, kFeatureCount> features{};
    int legitimacy = 0; // 1 = legitimate, 0 = fake
};

struct ProfileSet {
    std::vector<ProfileRecord> records;
    std::vector<std::string> feature_names = fpdetect::feature_names();

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    std::vector<int> labels() const {
        std::vector<int> l(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) l[i] = records[i].legitimacy;
        return l;
    }
    std::size_t count_label(int label) const {
        return static_cast<std::size_t>(std::count_if(
            records.begin(), records.end(),
            [&](const ProfileRecord& r) { return r.legitimacy == label; }));
    }
    ProfileSet subset(const std::vector<std::size_t>& idx) const {
        ProfileSet s;
        s.feature_names = feature_names;
        s.records.reserve(idx.size());
        for (std::size_t i : idx) s.records.push_back(records[i]);
        return s;
    }
};

struct FeatureMatrix {
    Matrix values; // |P| x |F|, entries in [0,1]
    std::vector<std::string> feature_names;
    std::vector<double> col_min, col_max; // per-feature normalization bounds

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }

    FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const {
        FeatureMatrix out;
        out.feature_names = feature_names;
        out.col_min = col_min;
        out.col_max = col_max;
        out.values = Matrix(idx.size(), values.cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < values.cols(); ++j)
                out.values(i, j) = values(idx[i], j);
        return out;
    }
    FeatureMatrix select_columns(const std::vector<std::size_t>& idx) const {
        FeatureMatrix out;
        out.values = Matrix(values.rows(), idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            out.feature_names.push_back(feature_names[idx[j]]);
            out.col_min.push_back(col_min[idx[j]]);
            out.col_max.push_back(col_max[idx[j]]);
            for (std::size_t i = 0; i < values.rows(); ++i)
                out.values(i, j) = values(i, idx[j]);
        }
        return out;
    }
};

struct DatasetSplit {
    ProfileSet train;
    ProfileSet test;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

inline double parse_cell(const std::string& raw, const std::string& column, std::size_t line_no) {
    const std::string s = trim(raw);
    if (s.empty()) return 0.0; // absent = 0
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw BadValueError("line " + std::to_string(line_no) + ", column " + column +
                            ": non-numeric value '" + s + "'");
    }
    if (pos != s.size())
        throw BadValueError("line " + std::to_string(line_no) + ", column " + column +
                            ": non-numeric value '" + s + "'");
    if (v < 0.0)
        throw BadValueError("line " + std::to_string(line_no) + ", column " + column +
                            ": negative value");
    return v;
}

} // namespace detail

/// Parse the profile CSV: header row with profile_id, the 15 feature
/// columns, and legitimacy, in any column order. Blank cells become 0;
/// No_Connections is capped at 500 and No_Skills at 50.
inline ProfileSet parse_profiles(const std::string& csv_text) {
    std::stringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw EmptySetError("empty input: no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = detail::split_csv_line(line);
    std::map<std::string, std::size_t> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) col_of[detail::trim(header[i])] = i;

    auto require = [&](const std::string& name) {
        auto it = col_of.find(name);
        if (it == col_of.end()) throw MissingColumnError("header lacks column '" + name + "'");
        return it->second;
    };
    const std::size_t id_col = require("profile_id");
    const std::size_t label_col = require("legitimacy");
    std::array<std::size_t, kFeatureCount> feat_col{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) feat_col[f] = require(feature_table()[f].name);

    ProfileSet set;
    std::map<std::string, bool> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        auto cell = [&](std::size_t i) -> std::string {
            return i < cells.size() ? cells[i] : std::string();
        };
        ProfileRecord rec;
        rec.profile_id = detail::trim(cell(id_col));
        if (seen_ids[rec.profile_id])
            throw BadValueError("line " + std::to_string(line_no) + ": duplicate profile_id '" +
                                rec.profile_id + "'");
        seen_ids[rec.profile_id] = true;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const FeatureInfo& info = feature_table()[f];
            double v = detail::parse_cell(cell(feat_col[f]), info.name, line_no);
            if (info.is_flag && v != 0.0 && v != 1.0)
                throw BadValueError("line " + std::to_string(line_no) + ", column " +
                                    info.name + ": presence flag must be 0 or 1");
            if (info.clamp >= 0.0) v = std::min(v, info.clamp);
            rec.features[f] = v;
        }
        const double lab = detail::parse_cell(cell(label_col), "legitimacy", line_no);
        if (lab != 0.0 && lab != 1.0)
            throw BadValueError("line " + std::to_string(line_no) +
                                ": legitimacy must be 0 or 1");
        rec.legitimacy = static_cast<int>(lab);
        set.records.push_back(std::move(rec));
    }
    return set;
}

inline std::string to_csv(const ProfileSet& set) {
    std::ostringstream out;
    out << "profile_id";
    for (const auto& n : set.feature_names) out << ',' << n;
    out << ",legitimacy\n";
    for (const auto& r : set.records) {
        out << r.profile_id;
        for (double v : r.features) {
            out << ',';
            if (v == std::floor(v) && std::fabs(v) < 1e15)
                out << static_cast<long long>(v);
            else
                out << v;
        }
        out << ',' << r.legitimacy << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Min-max normalization
// ---------------------------------------------------------------------------

/// v' = (v - min) / (max - min) per feature, using the set's own bounds.
/// Constant columns map to all-zeros.
inline FeatureMatrix normalize(const ProfileSet& profiles) {
    if (profiles.empty()) throw EmptySetError("normalize: empty profile set");
    const std::size_t n = profiles.size(), k = profiles.feature_names.size();
    FeatureMatrix out;
    out.feature_names = profiles.feature_names;
    out.values = Matrix(n, k);
    out.col_min.assign(k, 0.0);
    out.col_max.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double lo = profiles.records[0].features[j], hi = lo;
        for (const auto& r : profiles.records) {
            lo = std::min(lo, r.features[j]);
            hi = std::max(hi, r.features[j]);
        }
        out.col_min[j] = lo;
        out.col_max[j] = hi;
        const double range = hi - lo;
        for (std::size_t i = 0; i < n; ++i)
            out.values(i, j) =
                range > 0.0 ? (profiles.records[i].features[j] - lo) / range : 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stratified split
// ---------------------------------------------------------------------------

/// Deterministic stratified half/half split: train takes ceil(count/2) of
/// each class, shuffled by the seed.
inline DatasetSplit split(const ProfileSet& profiles, std::uint64_t seed) {
    if (profiles.empty()) throw EmptySetError("split: empty profile set");
    std::vector<std::size_t> legit, fake;
    for (std::size_t i = 0; i < profiles.size(); ++i)
        (profiles.records[i].legitimacy == 1 ? legit : fake).push_back(i);
    if (legit.empty() || fake.empty())
        throw SingleClassError("split: both classes must be present");

    std::mt19937_64 rng(seed);
    std::shuffle(legit.begin(), legit.end(), rng);
    std::shuffle(fake.begin(), fake.end(), rng);

    std::vector<std::size_t> train_idx, test_idx;
    auto take = [&](std::vector<std::size_t>& cls) {
        const std::size_t half = (cls.size() + 1) / 2; // odd counts: extra goes to train
        train_idx.insert(train_idx.end(), cls.begin(), cls.begin() + half);
        test_idx.insert(test_idx.end(), cls.begin() + half, cls.end());
    };
    take(legit);
    take(fake);
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    return {profiles.subset(train_idx), profiles.subset(test_idx), seed};
}

// ---------------------------------------------------------------------------
// Split representativeness
// ---------------------------------------------------------------------------

struct FeatureSignificance {
    std::string name;
    double levene_stat = 0.0;
    double levene_p = 1.0;
    double t_stat = 0.0;
    double t_p = 1.0;
    bool pooled = true;     // pooled-variance t when Levene p > 0.05, Welch otherwise
    bool degenerate = false; // both groups constant
};

/// Per feature (plus the legitimacy column): Levene's test, then pooled or
/// Welch two-sample t against the full set.
inline std::vector<FeatureSignificance> representativeness_test(const ProfileSet& subset,
                                                                const ProfileSet& full) {
    if (subset.empty() || full.empty())
        throw EmptySetError("representativeness_test: empty input");
    const std::size_t k = full.feature_names.size();
    std::vector<FeatureSignificance> out;
    out.reserve(k + 1);

    auto column = [](const ProfileSet& s, std::size_t j) {
        std::vector<double> v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            v[i] = j < kFeatureCount ? s.records[i].features[j]
                                     : static_cast<double>(s.records[i].legitimacy);
        return v;
    };

    for (std::size_t j = 0; j <= k; ++j) {
        FeatureSignificance sig;
        sig.name = j < k ? full.feature_names[j] : "Legitimacy";
        const std::vector<double> a = column(subset, j);
        const std::vector<double> b = column(full, j);
        const auto lev = stats::levene_mean(a, b);
        sig.levene_stat = std::isfinite(lev.statistic) ? lev.statistic : 0.0;
        sig.levene_p = lev.p;
        sig.pooled = lev.p > 0.05;
        const auto tt = sig.pooled ? stats::t_test_pooled(a, b) : stats::t_test_welch(a, b);
        if (tt.degenerate && tt.t == 0.0) {
            sig.t_stat = 0.0;
            sig.t_p = 1.0;
            sig.degenerate = true;
        } else {
            sig.t_stat = tt.t;
            sig.t_p = tt.p;
        }
        out.push_back(std::move(sig));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data generation
// ---------------------------------------------------------------------------

namespace detail {

// Self-contained samplers so that fixed seeds reproduce bit-identically
// regardless of the standard library's distribution implementations.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in [0, 1)
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Marsaglia-Tsang gamma; alpha < 1 handled by the boosting identity.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u > 0.0 ? u : 1e-300, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace detail

struct SynthConfig {
    double attenuation = 0.5;    // fake profiles: presence prob and values scaled by this
    double beta_concentration = 4.0; // spread of the per-feature value distribution
};

/// Generate a profile set calibrated to the published legitimate-profile
/// statistics: feature f present with probability count/40, and present
/// values drawn so the normalized column mean approaches the published
/// feature average. Fake profiles scale both the presence probability and
/// the drawn value by the attenuation factor.
inline ProfileSet synth_generate(std::size_t n_legit, std::size_t n_fake, std::uint64_t seed,
                                 const SynthConfig& cfg = {}) {
    ProfileSet set;
    detail::Sampler rng(seed);
    const double k = cfg.beta_concentration;

    auto make_record = [&](bool legit, std::size_t idx) {
        ProfileRecord rec;
        rec.profile_id = (legit ? "synth-L-" : "synth-F-") + std::to_string(idx);
        rec.legitimacy = legit ? 1 : 0;
        const double att = legit ? 1.0 : cfg.attenuation;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const FeatureInfo& info = feature_table()[f];
            const double presence = (info.legit_count / 40.0) * att;
            if (rng.uniform() >= presence) {
                rec.features[f] = 0.0;
                continue;
            }
            if (info.is_flag) {
                // binary values stay binary under attenuation: thin to keep
                // the expected value scaled by att
                rec.features[f] = (att >= 1.0 || rng.uniform() < att) ? 1.0 : 0.0;
                continue;
            }
            // conditional mean on the normalized scale: average / presence
            const double m = std::min(0.98, info.legit_average * 40.0 / info.legit_count);
            const double draw = rng.beta(m * k, (1.0 - m) * k);
            const double raw = att * draw * info.max_value;
            rec.features[f] = std::max(1.0, std::round(raw));
        }
        return rec;
    };

    for (std::size_t i = 0; i < n_legit; ++i) set.records.push_back(make_record(true, i + 1));
    for (std::size_t i = 0; i < n_fake; ++i) set.records.push_back(make_record(false, i + 1));
    return set;
}

} // namespace fpdetect
