#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace uotkit {

inline constexpr double default_lambda_tcyc = 10000.0;
inline constexpr double default_lambda_cc = 10.0;
inline constexpr double default_nce_temperature = 0.07;
inline constexpr double score_clamp = 1e-7;

// Weights of the total generator objective. The odc, nce and adversarial terms
// carry unit weight unless overridden.
struct LossWeights {
    double lambda_tcyc = default_lambda_tcyc;
    double lambda_cc = default_lambda_cc;
    double lambda_odc = 1.0;
    double lambda_nce = 1.0;
    double lambda_adv = 1.0;

    void validate() const;
};

struct NceConfig {
    double temperature = default_nce_temperature;
    void validate() const;
};

// mean log D(real) + mean log(1 - D(fake)), scores clamped to [1e-7, 1 - 1e-7].
double adversarial_value(std::span<const double> d_real, std::span<const double> d_fake);

using Embedding = std::vector<double>;

// -log softmax of the positive logit among {a.p / T} U {a.n_k / T}.
// Embeddings are used as given; normalize beforehand for cosine logits.
double nce_loss(std::span<const double> anchor, std::span<const double> positive,
                std::span<const Embedding> negatives, const NceConfig& cfg = {});

struct PatchSite {
    Embedding anchor;
    Embedding positive;
    std::vector<Embedding> negatives;
};

using PatchLayer = std::vector<PatchSite>;

// Sum of nce_loss over every layer and spatial site.
double patchnce_loss(std::span<const PatchLayer> layers, const NceConfig& cfg = {});

double total_loss(double tcyc, double cc, double odc, double nce, double adv, const LossWeights& w = {});

} // namespace uotkit
