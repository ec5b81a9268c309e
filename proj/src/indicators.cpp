#include "confcycle/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "confcycle/text.hpp"

namespace confcycle {

std::string to_string(Phase phase) {
    switch (phase) {
    case Phase::LkLc: return "LkLc";
    case Phase::LkHc: return "LkHc";
    case Phase::HkLc: return "HkLc";
    case Phase::HkHc: return "HkHc";
    }
    return "?";
}

std::optional<Phase> parse_phase(std::string_view s) {
    for (Phase ph : {Phase::LkLc, Phase::LkHc, Phase::HkLc, Phase::HkHc})
        if (s == to_string(ph)) return ph;
    return std::nullopt;
}

double xi_c(std::span<const EconomyState> states, double c0) {
    if (states.empty()) throw std::invalid_argument("xi_c of an empty trajectory");
    double sum = 0.0;
    for (const auto& s : states)
        if (c0 - s.c >= 0.0 && c0 > 0.0) sum += 1.0 - s.c / c0;
    return sum / static_cast<double>(states.size());
}

double xi_k(std::span<const EconomyState> states) {
    if (states.empty()) throw std::invalid_argument("xi_k of an empty trajectory");
    double sum = 0.0;
    for (const auto& s : states) {
        if (!(s.n > 0.0)) throw std::invalid_argument("xi_k needs positive labour at every period");
        if (s.n - s.k >= 0.0) sum += 1.0 - s.k / s.n;
    }
    return sum / static_cast<double>(states.size());
}

PhaseLabel classify_phase(double xi_c, double xi_k, double threshold, double permanent) {
    const bool high_c = xi_c >= threshold;
    const bool high_k = xi_k >= threshold;
    PhaseLabel label;
    if (high_k) label.phase = high_c ? Phase::HkHc : Phase::HkLc;
    else label.phase = high_c ? Phase::LkHc : Phase::LkLc;
    label.permanent_c = xi_c > permanent;
    label.permanent_k = xi_k > permanent;
    return label;
}

SpellStats spell_stats_from_indicator(std::span<const bool> low) {
    SpellStats st;
    const std::size_t n = low.size();
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start;
        while (end < n && low[end] == low[start]) ++end;
        const auto len = static_cast<std::int64_t>(end - start);
        const bool truncated = start == 0 || end == n;
        (low[start] ? st.raw_low_runs : st.raw_high_runs)++;
        if (truncated) st.truncated_length += len;
        else (low[start] ? st.spells_low : st.spells_high).push_back(len);
        start = end;
    }
    auto mean = [](const std::vector<std::int64_t>& v) -> std::optional<double> {
        if (v.empty()) return std::nullopt;
        return static_cast<double>(std::accumulate(v.begin(), v.end(), std::int64_t{0})) /
               static_cast<double>(v.size());
    };
    st.t_low_mean = mean(st.spells_low);
    st.t_high_mean = mean(st.spells_high);
    return st;
}

SpellStats spell_stats(std::span<const EconomyState> states, double c0) {
    std::vector<char> flags(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) flags[i] = states[i].c < c0;
    // std::vector<bool> has no contiguous storage; go through a plain array
    auto low = std::make_unique<bool[]>(flags.size());
    std::copy(flags.begin(), flags.end(), low.get());
    return spell_stats_from_indicator(std::span<const bool>(low.get(), flags.size()));
}

std::int64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

void detect_modes(Histogram& h, const BimodalityRule& rule) {
    h.mode_masses.clear();
    h.bimodal = false;
    const std::size_t nb = h.counts.size();
    const std::int64_t total = h.total();
    if (nb == 0 || total == 0) return;

    std::vector<double> s(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        const double left = static_cast<double>(h.counts[i == 0 ? 0 : i - 1]);
        const double right = static_cast<double>(h.counts[i + 1 == nb ? nb - 1 : i + 1]);
        s[i] = (left + static_cast<double>(h.counts[i]) + right) / 3.0;
    }

    const double keep = 1.0 - rule.min_dip;
    std::vector<std::size_t> cuts{0};
    double peak = s[0];
    bool descending = false;
    double valley = 0.0;
    std::size_t valley_at = 0;
    for (std::size_t i = 1; i < nb; ++i) {
        if (!descending) {
            if (s[i] >= peak) {
                peak = s[i];
            } else {
                descending = true;
                valley = s[i];
                valley_at = i;
            }
        } else if (s[i] < valley) {
            valley = s[i];
            valley_at = i;
        } else if (valley <= keep * peak && valley <= keep * s[i]) {
            cuts.push_back(valley_at);
            peak = s[i];
            descending = false;
        } else if (s[i] > peak) {
            peak = s[i];
            descending = false;
        }
    }
    cuts.push_back(nb);

    int significant = 0;
    for (std::size_t m = 0; m + 1 < cuts.size(); ++m) {
        const auto mass = std::accumulate(h.counts.begin() + static_cast<std::ptrdiff_t>(cuts[m]),
                                          h.counts.begin() + static_cast<std::ptrdiff_t>(cuts[m + 1]), std::int64_t{0});
        const double share = static_cast<double>(mass) / static_cast<double>(total);
        h.mode_masses.push_back(share);
        if (share >= rule.min_mass && mass > 0) ++significant;
    }
    h.bimodal = significant >= 2;
}

namespace {

Histogram bin_range(std::span<const double> series, int bins, double lo, double hi, const BimodalityRule& rule) {
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = hi - lo;
    for (double x : series) {
        if (x < lo || x > hi || std::isnan(x)) {
            ++h.excluded;
            continue;
        }
        std::size_t idx = 0;
        if (width > 0) {
            idx = static_cast<std::size_t>((x - lo) / width * bins);
            idx = std::min(idx, static_cast<std::size_t>(bins - 1));
        }
        ++h.counts[idx];
    }
    detect_modes(h, rule);
    return h;
}

void check_histogram_args(std::span<const double> series, int bins) {
    if (series.empty()) throw std::invalid_argument("histogram of an empty series");
    if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
}

} // namespace

Histogram histogram(std::span<const double> series, int bins, const BimodalityRule& rule) {
    check_histogram_args(series, bins);
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    return bin_range(series, bins, *mn, *mx, rule);
}

Histogram histogram_clipped(std::span<const double> series, int bins, double clip_quantile,
                            const BimodalityRule& rule) {
    check_histogram_args(series, bins);
    if (!(clip_quantile >= 0.0 && clip_quantile < 0.5)) throw std::invalid_argument("clip quantile must be in [0, 0.5)");
    if (clip_quantile == 0.0) return histogram(series, bins, rule);
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    const auto last = static_cast<double>(sorted.size() - 1);
    const double lo = sorted[static_cast<std::size_t>(std::floor(clip_quantile * last))];
    const double hi = sorted[static_cast<std::size_t>(std::ceil((1.0 - clip_quantile) * last))];
    return bin_range(series, bins, lo, hi, rule);
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "bin_lo,bin_hi,count\n";
    const double w = h.bin_width();
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double a = h.lo + w * static_cast<double>(i);
        const double b = i + 1 == h.counts.size() ? h.hi : h.lo + w * static_cast<double>(i + 1);
        out << text::format_double(a) << ',' << text::format_double(b) << ',' << h.counts[i] << '\n';
    }
}

CrisisReport analyse(std::span<const EconomyState> states, const ModelParams& p) {
    if (states.empty()) throw std::invalid_argument("cannot analyse an empty trajectory");
    CrisisReport rep;
    rep.xi_c = xi_c(states, p.c0);
    rep.xi_k = xi_k(states);
    rep.label = classify_phase(rep.xi_c, rep.xi_k, p.analysis.phase_threshold, p.analysis.permanent_threshold);
    rep.spells = spell_stats(states, p.c0);

    std::vector<double> c, n, S;
    c.reserve(states.size());
    n.reserve(states.size());
    S.reserve(states.size());
    double sum_s = 0.0;
    for (const auto& s : states) {
        c.push_back(s.c);
        n.push_back(s.n);
        S.push_back(s.S);
        sum_s += s.S;
    }
    rep.mean_sharpe = sum_s / static_cast<double>(states.size());

    const BimodalityRule rule{p.analysis.bimodal_min_mass, p.analysis.bimodal_min_dip};
    const int bins = p.analysis.histogram_bins;
    rep.hist_c = histogram(c, bins, rule);
    rep.hist_n = histogram(n, bins, rule);
    rep.hist_S = histogram_clipped(S, bins, p.analysis.sharpe_clip_quantile, rule);
    return rep;
}

nlohmann::json to_json(const CrisisReport& r) {
    auto opt = [](const std::optional<double>& v) -> nlohmann::json {
        if (v) return *v;
        return nullptr;
    };
    return nlohmann::json{
        {"xi_c", r.xi_c},
        {"xi_k", r.xi_k},
        {"log10_xi_c", log10_floored(r.xi_c)},
        {"log10_xi_k", log10_floored(r.xi_k)},
        {"phase", to_string(r.label.phase)},
        {"permanent_c", r.label.permanent_c},
        {"permanent_k", r.label.permanent_k},
        {"mean_sharpe", r.mean_sharpe},
        {"t_low_mean", opt(r.spells.t_low_mean)},
        {"t_high_mean", opt(r.spells.t_high_mean)},
        {"n_spells", r.spells.spells_low.size()},
        {"n_spells_high", r.spells.spells_high.size()},
        {"raw_low_runs", r.spells.raw_low_runs},
        {"bimodal_c", r.hist_c.bimodal},
        {"bimodal_n", r.hist_n.bimodal},
        {"bimodal_S", r.hist_S.bimodal},
    };
}

double log10_floored(double x) {
    if (!(x > 0.0)) return kLog10Floor;
    return std::max(kLog10Floor, std::log10(x));
}

} // namespace confcycle
