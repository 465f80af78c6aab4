#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/panel_io.hpp"
#include "dynmte/core/parallel.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/numkit/logistic.hpp"

namespace dynmte::dgp {

/// How treatments are assigned. Selection is the instrumented threshold rule
/// D_t = 1{pi_t >= V_t}; Randomized replaces every D_t by an independent fair
/// coin, so treatment is sequentially randomized.
enum class Assignment { Selection, Randomized };

/// Two-period threshold-crossing DGP with logistic selection and normal
/// outcome errors whose means shift with the resistances V_t.
///
/// Means of the outcome errors:
///   U1(1) ~ N(s11 (V1 - .5), 1),  U1(0) ~ N(s10 (V1 - .5), 1),
///   U2(1, d1) ~ N(s21 (V2 - .5) + U1(d1), 1),  U2(0, d1) ~ N(s20 (V2 - .5) + U1(d1), 1),
/// with (s11, s10, s21, s20) = u_slopes. Setting every slope to zero makes V
/// irrelevant for every potential outcome.
struct DgpSpec {
    std::size_t n = 891;
    Covariates alpha = {-0.25, -0.15, 0.4};
    Covariates beta = {-1.2, -1.5, 0.4};
    double theta = 0.1;
    double x3_mean = 5.0;
    double x3_var = 1.2;
    double p_x1 = 0.5;
    double p_x2 = 0.6;
    std::array<double, 4> u_slopes = {2.0, 1.0, 1.0, 2.0};
    Assignment assignment = Assignment::Selection;

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(p_x1) || !prob(p_x2)) throw ValidationError("dgp", "p_x1 and p_x2 must lie in [0, 1]");
        if (!(x3_var > 0.0)) throw ValidationError("dgp", "x3_var must be > 0");
        for (double a : alpha) {
            if (!std::isfinite(a)) throw ValidationError("dgp", "alpha must be finite");
        }
        for (double b : beta) {
            if (!std::isfinite(b)) throw ValidationError("dgp", "beta must be finite");
        }
        if (!std::isfinite(theta)) throw ValidationError("dgp", "theta must be finite");
    }

    /// Population mean of X.
    Covariates x_mean() const { return {p_x1, p_x2, x3_mean}; }

    friend bool operator==(const DgpSpec&, const DgpSpec&) = default;
};

/// Same spec with every V-slope of the error means set to zero.
inline DgpSpec degenerate(DgpSpec spec) {
    spec.u_slopes = {0.0, 0.0, 0.0, 0.0};
    return spec;
}

inline DgpSpec randomized(DgpSpec spec) {
    spec.assignment = Assignment::Randomized;
    return spec;
}

inline json to_json(const DgpSpec& s) {
    return json{{"n", s.n},
                {"alpha", s.alpha},
                {"beta", s.beta},
                {"theta", s.theta},
                {"x3_mean", s.x3_mean},
                {"x3_var", s.x3_var},
                {"p_x1", s.p_x1},
                {"p_x2", s.p_x2},
                {"u_slopes", s.u_slopes},
                {"assignment", s.assignment == Assignment::Selection ? "selection" : "randomized"}};
}

/// Missing fields keep their defaults; unknown fields are rejected.
inline DgpSpec dgp_spec_from_json(const json& j) {
    dynmte::detail::reject_unknown_keys(
        j, {"n", "alpha", "beta", "theta", "x3_mean", "x3_var", "p_x1", "p_x2", "u_slopes", "assignment"}, "dgp spec");
    DgpSpec s;
    const char* what = "dgp spec";
    dynmte::detail::read_field(j, "n", s.n, what);
    dynmte::detail::read_field(j, "alpha", s.alpha, what);
    dynmte::detail::read_field(j, "beta", s.beta, what);
    dynmte::detail::read_field(j, "theta", s.theta, what);
    dynmte::detail::read_field(j, "x3_mean", s.x3_mean, what);
    dynmte::detail::read_field(j, "x3_var", s.x3_var, what);
    dynmte::detail::read_field(j, "p_x1", s.p_x1, what);
    dynmte::detail::read_field(j, "p_x2", s.p_x2, what);
    dynmte::detail::read_field(j, "u_slopes", s.u_slopes, what);
    std::string assignment = "selection";
    dynmte::detail::read_field(j, "assignment", assignment, what);
    if (assignment == "selection") {
        s.assignment = Assignment::Selection;
    } else if (assignment == "randomized") {
        s.assignment = Assignment::Randomized;
    } else {
        throw ValidationError("dgp", "unknown assignment '" + assignment + "' (selection | randomized)");
    }
    s.validate();
    return s;
}

inline DgpSpec load_dgp_spec(const std::string& path) { return dgp_spec_from_json(dynmte::detail::read_json_file(path)); }

/// Latent draws of one individual. The standard-normal innovations e1[d1] and
/// e2[d2][d1] are shared by every sequence so that all four potential outcomes
/// are drawn jointly.
struct Latents {
    double v1 = 0.5, v2 = 0.5;
    std::array<double, 2> e1{};
    std::array<std::array<double, 2>, 2> e2{};
    std::array<double, 2> coin{0.5, 0.5};
};

/// Fixed draw order so that each individual consumes the same stream positions
/// regardless of the assignment rule.
inline Latents draw_innovations(RandomStream& rng, double v1, double v2) {
    Latents l;
    l.v1 = v1;
    l.v2 = v2;
    l.e1[1] = rng.normal();
    l.e1[0] = rng.normal();
    l.e2[1][1] = rng.normal();
    l.e2[1][0] = rng.normal();
    l.e2[0][1] = rng.normal();
    l.e2[0][0] = rng.normal();
    return l;
}

/// U1(d1).
inline double u1(const DgpSpec& s, const Latents& l, int d1) {
    const double slope = d1 ? s.u_slopes[0] : s.u_slopes[1];
    return slope * (l.v1 - 0.5) + l.e1[d1];
}

/// U2(d2, d1).
inline double u2(const DgpSpec& s, const Latents& l, int d2, int d1) {
    const double slope = d2 ? s.u_slopes[2] : s.u_slopes[3];
    return slope * (l.v2 - 0.5) + u1(s, l, d1) + l.e2[d2][d1];
}

/// Y1(d1).
inline int y1_potential(const DgpSpec& s, const Covariates& x, const Latents& l, int d1) {
    return dot(s.beta, x) >= u1(s, l, d1) ? 1 : 0;
}

/// Y2(d2, d1); the lag term uses the same-arm Y1(d1).
inline int y2_potential(const DgpSpec& s, const Covariates& x, const Latents& l, int d2, int d1) {
    return dot(s.beta, x) + s.theta * y1_potential(s, x, l, d1) >= u2(s, l, d2, d1) ? 1 : 0;
}

inline int y2_potential(const DgpSpec& s, const Covariates& x, const Latents& l, const TreatmentSequence& seq) {
    if (seq.size() != 2) throw ValidationError("dgp", "the DGP has two periods; got sequence '" + seq.str() + "'");
    return y2_potential(s, x, l, seq[1], seq[0]);
}

inline double true_pi1(const DgpSpec& s, double z1, const Covariates& x) { return numkit::logistic(z1 + dot(s.alpha, x)); }

inline double true_pi2(const DgpSpec& s, double z1, double z2, const Covariates& x, int d1, int y1) {
    return numkit::logistic(z1 + z2 + dot(s.alpha, x) + d1 - y1);
}

/// One simulated individual with its latents, for callers that need oracle access.
struct Individual {
    Covariates x{};
    double z1 = 0.0, z2 = 0.0;
    Latents latents;
    int d1 = 0, d2 = 0, y1 = 0, y2 = 0;
    double pi1 = 0.5, pi2 = 0.5;
};

inline Individual draw_individual(const DgpSpec& s, RandomStream& rng) {
    Individual ind;
    ind.x[0] = rng.bernoulli(s.p_x1) ? 1.0 : 0.0;
    ind.x[1] = rng.bernoulli(s.p_x2) ? 1.0 : 0.0;
    ind.x[2] = rng.normal(s.x3_mean, std::sqrt(s.x3_var));
    ind.z1 = rng.normal();
    ind.z2 = rng.normal();
    const double v1 = rng.uniform();
    const double v2 = rng.uniform();
    ind.latents = draw_innovations(rng, v1, v2);
    ind.latents.coin[0] = rng.uniform();
    ind.latents.coin[1] = rng.uniform();

    const bool randomized = s.assignment == Assignment::Randomized;
    ind.pi1 = randomized ? 0.5 : true_pi1(s, ind.z1, ind.x);
    ind.d1 = (ind.pi1 >= (randomized ? ind.latents.coin[0] : v1)) ? 1 : 0;
    ind.y1 = y1_potential(s, ind.x, ind.latents, ind.d1);
    ind.pi2 = randomized ? 0.5 : true_pi2(s, ind.z1, ind.z2, ind.x, ind.d1, ind.y1);
    ind.d2 = (ind.pi2 >= (randomized ? ind.latents.coin[1] : v2)) ? 1 : 0;
    ind.y2 = y2_potential(s, ind.x, ind.latents, ind.d2, ind.d1);
    return ind;
}

/// Simulates spec.n individuals from `stream`, in order.
inline PanelDataset simulate(const DgpSpec& spec, RandomStream stream) {
    spec.validate();
    std::vector<Covariates> x;
    std::vector<std::vector<double>> z(2);
    std::vector<std::vector<std::uint8_t>> d(2), y(2);
    x.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const Individual ind = draw_individual(spec, stream);
        x.push_back(ind.x);
        z[0].push_back(ind.z1);
        z[1].push_back(ind.z2);
        d[0].push_back(static_cast<std::uint8_t>(ind.d1));
        d[1].push_back(static_cast<std::uint8_t>(ind.d2));
        y[0].push_back(static_cast<std::uint8_t>(ind.y1));
        y[1].push_back(static_cast<std::uint8_t>(ind.y2));
    }
    return PanelDataset(std::move(x), std::move(z), std::move(d), std::move(y));
}

/// A Monte Carlo mean and its standard error.
struct OracleValue {
    double value = 0.0;
    double se = 0.0;
    std::size_t draws = 0;
};

inline constexpr std::size_t kMinMtrDraws = 100000;
inline constexpr std::size_t kMinAteDraws = 1000000;

namespace detail {

inline constexpr std::size_t kOracleChunk = 1U << 16;

/// Mean and SE of sample(rng) over `draws` draws, split into fixed-size chunks
/// on substreams of `seed`; the chunking, not the thread count, fixes the result.
template <class Sample>
OracleValue chunked_mean(std::size_t draws, std::uint64_t seed, int threads, Sample&& sample) {
    const std::size_t chunks = (draws + kOracleChunk - 1) / kOracleChunk;
    std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
    parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
        RandomStream rng = substream(seed, c);
        const std::size_t begin = c * kOracleChunk;
        const std::size_t end = std::min(draws, begin + kOracleChunk);
        double s = 0.0, q = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const double v = sample(rng);
            s += v;
            q += v * v;
        }
        sums[c] = s;
        squares[c] = q;
    });
    double s = 0.0, q = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        s += sums[c];
        q += squares[c];
    }
    const double nd = static_cast<double>(draws);
    OracleValue out;
    out.value = s / nd;
    const double var = std::max(0.0, q / nd - out.value * out.value);
    out.se = std::sqrt(var / nd);
    out.draws = draws;
    return out;
}

inline void check_unit_point(double v1, double v2) {
    if (!(v1 > 0.0 && v1 < 1.0 && v2 > 0.0 && v2 < 1.0)) {
        throw ValidationError("dgp", "resistance point must lie in the open unit square");
    }
}

}  // namespace detail

/// E[Y2(seq) | X = x, V = v] by simulating the outcome errors with V held at v.
inline OracleValue oracle_mtr(const DgpSpec& spec, const TreatmentSequence& seq, const Covariates& x,
                              std::array<double, 2> v, std::size_t draws, std::uint64_t seed = 0, int threads = 0) {
    spec.validate();
    if (draws < kMinMtrDraws) {
        throw ValidationError("dgp", "oracle_mtr needs at least " + std::to_string(kMinMtrDraws) + " draws");
    }
    if (seq.size() != 2) throw ValidationError("dgp", "the DGP has two periods; got sequence '" + seq.str() + "'");
    detail::check_unit_point(v[0], v[1]);
    const int d1 = seq[0], d2 = seq[1];
    return detail::chunked_mean(draws, seed, threads, [&](RandomStream& rng) {
        const Latents l = draw_innovations(rng, v[0], v[1]);
        return static_cast<double>(y2_potential(spec, x, l, d2, d1));
    });
}

/// E[Y2(a) - Y2(b) | X = x, V = v], both arms from the same latent draws.
inline OracleValue oracle_mte(const DgpSpec& spec, const Contrast& c, const Covariates& x, std::array<double, 2> v,
                              std::size_t draws, std::uint64_t seed = 0, int threads = 0) {
    spec.validate();
    if (draws < kMinMtrDraws) {
        throw ValidationError("dgp", "oracle_mte needs at least " + std::to_string(kMinMtrDraws) + " draws");
    }
    if (c.a.size() != 2 || c.b.size() != 2) throw ValidationError("dgp", "the DGP has two periods");
    detail::check_unit_point(v[0], v[1]);
    if (c.a == c.b) return {0.0, 0.0, draws};
    return detail::chunked_mean(draws, seed, threads, [&](RandomStream& rng) {
        const Latents l = draw_innovations(rng, v[0], v[1]);
        return static_cast<double>(y2_potential(spec, x, l, c.a) - y2_potential(spec, x, l, c.b));
    });
}

/// E[Y2(a) - Y2(b)] integrating over X, V and the outcome errors, both arms forced
/// on the same draws.
inline OracleValue oracle_ate(const DgpSpec& spec, const Contrast& c, std::size_t draws, std::uint64_t seed = 0,
                              int threads = 0) {
    spec.validate();
    if (draws < kMinAteDraws) {
        throw ValidationError("dgp", "oracle_ate needs at least " + std::to_string(kMinAteDraws) + " draws");
    }
    if (c.a.size() != 2 || c.b.size() != 2) throw ValidationError("dgp", "the DGP has two periods");
    if (c.a == c.b) return {0.0, 0.0, draws};
    return detail::chunked_mean(draws, seed, threads, [&](RandomStream& rng) {
        const Individual ind = draw_individual(spec, rng);
        return static_cast<double>(y2_potential(spec, ind.x, ind.latents, c.a) -
                                   y2_potential(spec, ind.x, ind.latents, c.b));
    });
}

/// E[Y2(a) - Y2(b) | X = x], integrating V over the unit square.
inline OracleValue oracle_ate_at(const DgpSpec& spec, const Contrast& c, const Covariates& x, std::size_t draws,
                                 std::uint64_t seed = 0, int threads = 0) {
    spec.validate();
    if (draws < kMinAteDraws) {
        throw ValidationError("dgp", "oracle_ate_at needs at least " + std::to_string(kMinAteDraws) + " draws");
    }
    if (c.a.size() != 2 || c.b.size() != 2) throw ValidationError("dgp", "the DGP has two periods");
    if (c.a == c.b) return {0.0, 0.0, draws};
    return detail::chunked_mean(draws, seed, threads, [&](RandomStream& rng) {
        const double v1 = rng.uniform();
        const double v2 = rng.uniform();
        const Latents l = draw_innovations(rng, v1, v2);
        return static_cast<double>(y2_potential(spec, x, l, c.a) - y2_potential(spec, x, l, c.b));
    });
}

/// Mean potential outcome E[Y2(seq)] over the population.
inline OracleValue oracle_arm_mean(const DgpSpec& spec, const TreatmentSequence& seq, std::size_t draws,
                                   std::uint64_t seed = 0, int threads = 0) {
    spec.validate();
    if (seq.size() != 2) throw ValidationError("dgp", "the DGP has two periods");
    return detail::chunked_mean(draws, seed, threads, [&](RandomStream& rng) {
        const Individual ind = draw_individual(spec, rng);
        return static_cast<double>(y2_potential(spec, ind.x, ind.latents, seq));
    });
}

struct OracleRecord {
    std::string contrast;
    OracleValue value;
};

/// CSV with header contrast,value,se.
inline std::string oracle_csv(const std::vector<OracleRecord>& records) {
    std::string out = "contrast,value,se\n";
    for (const auto& r : records) {
        out += r.contrast + "," + dynmte::detail::format_real(r.value.value) + "," +
               dynmte::detail::format_real(r.value.se) + "\n";
    }
    return out;
}

inline json oracle_json(const std::vector<OracleRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        arr.push_back({{"contrast", r.contrast}, {"value", r.value.value}, {"se", r.value.se}, {"draws", r.value.draws}});
    }
    return arr;
}

}  // namespace dynmte::dgp
