// Small seeded model instances shared by the unit and acceptance tests.
#ifndef STMMC_TEST_FIXTURES_HPP
#define STMMC_TEST_FIXTURES_HPP

#include "stmmc/graph.hpp"
#include "stmmc/model.hpp"

#include "oracles.hpp"

#include <random>

namespace fixture {

using namespace stmmc;

struct TinyInstance {
    MpgaModel model;
    ModelInputs inputs;
    CorruptionPlan plan;
};

/// N spots, gene width m, image width d, encoder widths `hidden`. Biases and fusion logits are
/// randomised too, so no gradient is trivially zero by construction.
inline TinyInstance tiny_instance(std::uint64_t seed, Index n = 6, Index m = 5, Index d = 4,
                                  std::vector<Index> hidden = {4, 3}) {
    std::mt19937_64 gen(seed);
    TinyInstance t;
    t.model = MpgaModel(m, d, hidden, seed);
    for (auto* layers : {&t.model.gene_layers, &t.model.image_layers}) {
        for (auto& layer : *layers) layer.bias.value = oracle::random_matrix(1, layer.out_dim(), gen, -0.2, 0.2);
    }
    t.model.decoder.bias.value = oracle::random_matrix(1, m, gen, -0.2, 0.2);
    t.model.fusion_logits.value = oracle::random_matrix(1, static_cast<Index>(hidden.size()), gen);
    const Matrix coords = oracle::random_matrix(n, 2, gen, 0.0, 10.0);
    const Matrix gene = oracle::random_matrix(n, m, gen);
    const Matrix image = oracle::random_matrix(n, d, gen);
    t.inputs = ModelInputs::make(gene, image, knn_graph(coords, 2), knn_graph(image, 2, GraphKind::similarity));
    t.plan = CorruptionPlan::from_seed(static_cast<int>(n), seed + 1);
    return t;
}

/// Analytic total-loss gradient versus central differences over every parameter entry.
inline double model_gradient_error(TinyInstance& t, const LossWeights& w, const CorruptionPlan* plan) {
    auto params = t.model.parameters();
    for (auto* p : params) p->zero_grad();
    forward_backward(t.model, t.inputs, plan, w);
    std::vector<Matrix*> values;
    std::vector<Matrix> grads;
    for (auto* p : params) {
        values.push_back(&p->value);
        grads.push_back(p->grad);
    }
    auto loss = [&] { return evaluate_loss(t.model, t.inputs, plan, w).total; };
    return oracle::worst_gradient_error(values, grads, loss);
}

} // namespace fixture

#endif
