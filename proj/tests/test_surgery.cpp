#include <doctest.h>

#include "test_util.hpp"
#include "ylt/config.hpp"
#include "ylt/errors.hpp"
#include "ylt/network.hpp"
#include "ylt/surgery.hpp"
#include "ylt/weights.hpp"

using namespace ylt;
using yt::check_throws_containing;

namespace {

NetworkConfig backbone_config(int classes, int anchors) {
    std::vector<std::pair<float, float>> priors;
    for (int a = 0; a < anchors; ++a)
        priors.push_back({1.0f + static_cast<float>(a), 1.5f + static_cast<float>(a)});
    NetworkConfig cfg;
    cfg.input_width = cfg.input_height = 16;
    LayerSpec conv;
    conv.filters = 4;
    conv.batch_normalize = true;
    cfg.layers.push_back(conv);
    LayerSpec pool;
    pool.kind = LayerKind::maxpool;
    cfg.layers.push_back(pool);
    LayerSpec mid;
    mid.filters = 6;
    mid.batch_normalize = true;
    cfg.layers.push_back(mid);
    LayerSpec head;
    head.filters = required_final_filters(classes, anchors);
    head.size = 1;
    head.pad = 0;
    head.batch_normalize = false;
    head.activation = Activation::linear;
    cfg.layers.push_back(head);
    cfg.head.num_classes = classes;
    cfg.head.anchors = priors;
    validate_config(cfg);
    return cfg;
}

} // namespace

TEST_SUITE_BEGIN("surgery");

TEST_CASE("retarget_config replaces the class-dependent pieces only") {
    NetworkConfig source = backbone_config(20, 5); // 125-filter head
    CHECK(source.layers.back().filters == 125);

    NetworkConfig target = retarget_config(source, 14, source.head.anchors);
    CHECK(target.layers.back().filters == 95);
    CHECK(target.head.num_classes == 14);
    CHECK(target.head.anchors == source.head.anchors);
    CHECK(target.layers.size() == source.layers.size());
    CHECK(target.layers[0].filters == source.layers[0].filters);

    std::vector<std::pair<float, float>> three{{1.0f, 1.0f}, {2.0f, 2.0f}, {3.0f, 3.0f}};
    NetworkConfig retargeted = retarget_config(source, 2, three);
    CHECK(retargeted.layers.back().filters == 21);
    CHECK(retargeted.head.num_anchors() == 3);
    CHECK(retargeted.layers.back().filters == required_final_filters(2, 3));

    check_throws_containing<ConfigError>([&] { retarget_config(source, 0, three); },
                                         "at least 1");
    check_throws_containing<ConfigError>([&] { retarget_config(source, 3, {}); }, "anchors");
}

TEST_CASE("plan always reinitializes the final convolutional layer") {
    NetworkConfig target = backbone_config(3, 2);
    SurgeryPlan plan = make_surgery_plan(target, 1);
    CHECK(plan.source_classes == 1);
    CHECK(plan.target_classes == 3);
    CHECK(plan.num_anchors == 2);
    REQUIRE(plan.reinit_layers.size() == 1);
    CHECK(plan.reinit_layers[0] == 2); // third conv layer (pooling does not count)
}

TEST_CASE("apply_surgery copies the backbone bit-exactly and reseeds the head") {
    NetworkConfig source_cfg = backbone_config(1, 2);
    Network source(source_cfg, 11);
    source.layers()[0].running_mean.fill(0.33f); // pretend the stats were trained
    WeightsFile weights = snapshot_weights(source);

    NetworkConfig target_cfg = retarget_config(source_cfg, 3, source_cfg.head.anchors);
    SurgeryPlan plan = make_surgery_plan(target_cfg, source_cfg.head.num_classes);
    Network grafted = apply_surgery(weights, target_cfg, plan, 77);

    // Backbone layers (conv 0 and 1) carry the source values, including the
    // batchnorm statistics.
    CHECK(yt::same_bits(grafted.layers()[0].kernels.value, source.layers()[0].kernels.value));
    CHECK(yt::same_bits(grafted.layers()[0].running_mean, source.layers()[0].running_mean));
    CHECK(yt::same_bits(grafted.layers()[2].kernels.value, source.layers()[2].kernels.value));

    // The head has the retargeted filter count and the fresh seed's values.
    CHECK(grafted.layers()[3].kernels.value.shape[0] == required_final_filters(3, 2));
    Network fresh(target_cfg, 77);
    CHECK(yt::same_bits(grafted.layers()[3].kernels.value, fresh.layers()[3].kernels.value));
    CHECK_FALSE(yt::same_bits(grafted.layers()[3].kernels.value,
                              fresh.layers()[0].kernels.value));
}

TEST_CASE("surgery across several class/anchor combinations") {
    for (int classes : {1, 2, 7}) {
        for (int anchors : {1, 3}) {
            NetworkConfig source_cfg = backbone_config(1, anchors);
            Network source(source_cfg, 3);
            WeightsFile weights = snapshot_weights(source);
            NetworkConfig target_cfg = retarget_config(source_cfg, classes,
                                                       source_cfg.head.anchors);
            SurgeryPlan plan = make_surgery_plan(target_cfg, 1);
            Network grafted = apply_surgery(weights, target_cfg, plan, 5);
            CHECK(grafted.layers().back().kernels.value.shape[0] ==
                  (classes + 5) * anchors);
            CHECK(yt::tensor_checksum(grafted.layers()[0].kernels.value) ==
                  yt::tensor_checksum(source.layers()[0].kernels.value));
        }
    }
}

TEST_CASE("mismatched source weights are rejected") {
    NetworkConfig source_cfg = backbone_config(1, 2);
    Network source(source_cfg, 11);
    WeightsFile weights = snapshot_weights(source);
    NetworkConfig target_cfg = retarget_config(source_cfg, 3, source_cfg.head.anchors);
    SurgeryPlan plan = make_surgery_plan(target_cfg, 1);

    WeightsFile fewer = weights;
    fewer.layers.pop_back();
    check_throws_containing<DataError>(
        [&] { apply_surgery(fewer, target_cfg, plan, 1); }, "layers");

    WeightsFile fatter = weights;
    fatter.layers[0].filters = 99;
    CHECK_THROWS_AS(apply_surgery(fatter, target_cfg, plan, 1), DataError);

    SurgeryPlan no_head = plan;
    no_head.reinit_layers = {0};
    check_throws_containing<ConfigError>(
        [&] { apply_surgery(weights, target_cfg, no_head, 1); }, "final convolutional");

    SurgeryPlan out_of_range = plan;
    out_of_range.reinit_layers = {0, 2, 9};
    CHECK_THROWS_AS(apply_surgery(weights, target_cfg, out_of_range, 1), ConfigError);

    SurgeryPlan wrong_head = plan;
    wrong_head.target_classes = 4;
    check_throws_containing<ConfigError>(
        [&] { apply_surgery(weights, target_cfg, wrong_head, 1); }, "disagree");
}

TEST_CASE("extra reinit layers take the fresh initialization too") {
    NetworkConfig source_cfg = backbone_config(1, 2);
    Network source(source_cfg, 11);
    WeightsFile weights = snapshot_weights(source);
    NetworkConfig target_cfg = retarget_config(source_cfg, 2, source_cfg.head.anchors);
    SurgeryPlan plan = make_surgery_plan(target_cfg, 1);
    plan.reinit_layers = {1, 2};

    Network grafted = apply_surgery(weights, target_cfg, plan, 13);
    Network fresh(target_cfg, 13);
    CHECK(yt::same_bits(grafted.layers()[0].kernels.value, source.layers()[0].kernels.value));
    CHECK(yt::same_bits(grafted.layers()[2].kernels.value, fresh.layers()[2].kernels.value));
    CHECK_FALSE(yt::same_bits(grafted.layers()[2].kernels.value,
                              source.layers()[2].kernels.value));
}

TEST_SUITE_END();
