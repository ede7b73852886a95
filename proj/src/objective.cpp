#include "uotkit/objective.hpp"

#include "uotkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uotkit {

void LossWeights::validate() const {
    for (double w : {lambda_tcyc, lambda_cc, lambda_odc, lambda_nce, lambda_adv}) {
        require(std::isfinite(w) && w >= 0.0, ErrorCode::invalid_argument, "loss weights must be finite and >= 0");
    }
}

void NceConfig::validate() const {
    require(std::isfinite(temperature) && temperature > 0.0, ErrorCode::invalid_argument,
            "NCE temperature must be positive");
}

namespace {

double mean_log(std::span<const double> scores, bool complement) {
    double s = 0.0;
    for (double d : scores) {
        require(!std::isnan(d), ErrorCode::non_finite, "discriminator score is NaN");
        const double c = std::clamp(d, score_clamp, 1.0 - score_clamp);
        s += std::log(complement ? 1.0 - c : c);
    }
    return s / static_cast<double>(scores.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

} // namespace

double adversarial_value(std::span<const double> d_real, std::span<const double> d_fake) {
    require(!d_real.empty() && !d_fake.empty(), ErrorCode::invalid_argument, "discriminator score lists are empty");
    return mean_log(d_real, false) + mean_log(d_fake, true);
}

double nce_loss(std::span<const double> anchor, std::span<const double> positive,
                std::span<const Embedding> negatives, const NceConfig& cfg) {
    cfg.validate();
    require(anchor.size() == positive.size(), ErrorCode::invalid_argument, "anchor and positive differ in dimension");
    std::vector<double> logits;
    logits.reserve(negatives.size() + 1);
    logits.push_back(dot(anchor, positive) / cfg.temperature);
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        require(negatives[k].size() == anchor.size(), ErrorCode::invalid_argument,
                "negative " + std::to_string(k) + " differs in dimension");
        logits.push_back(dot(anchor, negatives[k]) / cfg.temperature);
    }
    for (double l : logits) require(std::isfinite(l), ErrorCode::non_finite, "NCE logit is not finite");
    const double top = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (double l : logits) s += std::exp(l - top);
    return top + std::log(s) - logits.front();
}

double patchnce_loss(std::span<const PatchLayer> layers, const NceConfig& cfg) {
    double total = 0.0;
    for (const PatchLayer& layer : layers) {
        for (const PatchSite& site : layer) total += nce_loss(site.anchor, site.positive, site.negatives, cfg);
    }
    return total;
}

double total_loss(double tcyc, double cc, double odc, double nce, double adv, const LossWeights& w) {
    w.validate();
    for (double v : {tcyc, cc, odc, nce, adv}) require(std::isfinite(v), ErrorCode::non_finite, "loss component is not finite");
    return w.lambda_tcyc * tcyc + w.lambda_cc * cc + w.lambda_odc * odc + w.lambda_nce * nce + w.lambda_adv * adv;
}

} // namespace uotkit
