#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/firststage/firststage.hpp"
#include "dynmte/mtr/conditional.hpp"
#include "dynmte/mtr/surface.hpp"

namespace dynmte::mtr {

enum class EffectKind { Mte, AteAtX, AteMarginal };

inline std::string kind_name(EffectKind k) {
    switch (k) {
        case EffectKind::Mte:
            return "mte";
        case EffectKind::AteAtX:
            return "ate-x";
        case EffectKind::AteMarginal:
            return "ate";
    }
    return "?";
}

inline EffectKind parse_kind(const std::string& s) {
    if (s == "mte") return EffectKind::Mte;
    if (s == "ate-x") return EffectKind::AteAtX;
    if (s == "ate") return EffectKind::AteMarginal;
    throw ValidationError("mtr-effects", "unknown effect kind '" + s + "' (mte | ate | ate-x)");
}

/// One effect to estimate. `x` is used by Mte and AteAtX, `v` by Mte only.
struct EffectTarget {
    Contrast contrast;
    EffectKind kind = EffectKind::AteMarginal;
    Covariates x{};
    std::array<double, 2> v{0.5, 0.5};

    /// Label without commas, e.g. "MTE(11:00;0.25;0.75)" or "ATE(10:01)".
    std::string label() const {
        char buf[96];
        switch (kind) {
            case EffectKind::Mte:
                std::snprintf(buf, sizeof buf, "MTE(%s;%g;%g)", contrast.str().c_str(), v[0], v[1]);
                break;
            case EffectKind::AteAtX:
                std::snprintf(buf, sizeof buf, "ATEx(%s)", contrast.str().c_str());
                break;
            case EffectKind::AteMarginal:
                std::snprintf(buf, sizeof buf, "ATE(%s)", contrast.str().c_str());
                break;
        }
        return buf;
    }
};

/// First stage plus the mixed MTR surfaces of the requested sequences.
class FittedPipeline {
public:
    FittedPipeline(firststage::FirstStage first_stage, std::vector<Covariates> xs)
        : first_stage_(std::move(first_stage)),
          mixing_(std::make_shared<const firststage::MixingModel>(first_stage_.mixing)),
          xs_(std::move(xs)) {}

    const firststage::FirstStage& first_stage() const noexcept { return first_stage_; }
    std::span<const Covariates> sample_x() const noexcept { return xs_; }

    void add(ConditionalMtrFit fit) {
        const std::string key = fit.seq.str();
        surfaces_.insert_or_assign(key, MtrSurface(std::move(fit), mixing_));
    }

    bool has(const TreatmentSequence& seq) const { return surfaces_.count(seq.str()) > 0; }

    const MtrSurface& surface(const TreatmentSequence& seq) const {
        auto it = surfaces_.find(seq.str());
        if (it == surfaces_.end()) throw ValidationError("mtr-effects", "sequence " + seq.str() + " was not fitted");
        return it->second;
    }

    std::vector<TreatmentSequence> sequences() const {
        std::vector<TreatmentSequence> out;
        for (const auto& [key, _] : surfaces_) out.push_back(TreatmentSequence::parse(key));
        return out;
    }

    double evaluate(const EffectTarget& t) const {
        if (t.contrast.a == t.contrast.b) {
            if (t.contrast.a.size() != 2) throw ValidationError("mtr-effects", "contrast must cover two periods");
            return 0.0;
        }
        const auto& a = surface(t.contrast.a);
        const auto& b = surface(t.contrast.b);
        switch (t.kind) {
            case EffectKind::Mte:
                return mte(a, b, t.x, t.v);
            case EffectKind::AteAtX:
                return ate_at(a, b, t.x);
            case EffectKind::AteMarginal:
                return ate_marginal(a, b, xs_);
        }
        return 0.0;
    }

private:
    firststage::FirstStage first_stage_;
    std::shared_ptr<const firststage::MixingModel> mixing_;
    std::vector<Covariates> xs_;
    std::map<std::string, MtrSurface> surfaces_;
};

/// Sequences that the targets need fitted, in index order. Identical arms need none.
inline std::vector<TreatmentSequence> sequences_needed(std::span<const EffectTarget> targets) {
    std::vector<bool> need(4, false);
    for (const auto& t : targets) {
        if (t.contrast.a.size() != 2 || t.contrast.b.size() != 2) {
            throw ValidationError("mtr-effects", "contrast " + t.contrast.str() + " must cover two periods");
        }
        if (t.contrast.a == t.contrast.b) continue;
        need[t.contrast.a.index()] = true;
        need[t.contrast.b.index()] = true;
    }
    std::vector<TreatmentSequence> out;
    for (const auto& s : all_sequences(2)) {
        if (need[s.index()]) out.push_back(s);
    }
    return out;
}

/// Runs the full estimator on `data`: propensities, mixing model, and the
/// conditional MTR fit of each listed sequence.
inline FittedPipeline fit_pipeline(const PanelDataset& data, const EstimationConfig& config,
                                   std::span<const TreatmentSequence> sequences) {
    auto fs = firststage::fit_first_stage(data, config);
    std::vector<Covariates> xs(data.x().begin(), data.x().end());
    FittedPipeline fp(std::move(fs), std::move(xs));
    for (const auto& seq : sequences) {
        fp.add(fit_conditional_mtr(data, seq, fp.first_stage().pi1, fp.first_stage().pi2, config));
    }
    return fp;
}

inline FittedPipeline fit_pipeline(const PanelDataset& data, const EstimationConfig& config) {
    const auto seqs = all_sequences(2);
    return fit_pipeline(data, config, seqs);
}

/// Point estimates of every target from one pass of the estimator.
inline std::vector<double> estimate_targets(const PanelDataset& data, std::span<const EffectTarget> targets,
                                            const EstimationConfig& config) {
    const auto seqs = sequences_needed(targets);
    if (data.t_max() < 2) throw ValidationError("mtr-effects", "estimation needs a two-period panel");
    const FittedPipeline fp = fit_pipeline(data, config, seqs);
    std::vector<double> out;
    out.reserve(targets.size());
    for (const auto& t : targets) out.push_back(fp.evaluate(t));
    return out;
}

}  // namespace dynmte::mtr
