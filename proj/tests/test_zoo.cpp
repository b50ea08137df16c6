#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sqdse/zoo.hpp"

using namespace sqdse;

namespace {

bool within(double value, double target, double tolerance) {
    return value >= target * (1.0 - tolerance) && value <= target * (1.0 + tolerance);
}

}  // namespace

TEST_CASE("every catalog entry builds, validates and infers shapes") {
    CHECK(catalog().size() >= 20);
    for (const auto& entry : catalog()) {
        LayerGraph g = build_variant(entry.name);
        CHECK(g.name == entry.name);
        CHECK(validate(g).empty());
        CHECK_NOTHROW(infer_shapes(g));
    }
}

TEST_CASE("unknown variant name throws") {
    CHECK_THROWS_AS(build_variant("ResNet-50"), ZooError);
}

TEST_CASE("reference network parameter counts match published totals") {
    CHECK(param_count(infer_shapes(build_alexnet())) == 60965224);
    CHECK(within(double(param_count(infer_shapes(build_squeezenet_v10()))), 1.2e6, 0.10));
    CHECK(within(double(param_count(infer_shapes(build_squeezenet_v11()))), 1.2e6, 0.10));
    CHECK(within(double(param_count(infer_shapes(build_mobilenet()))), 4.2e6, 0.05));
}

TEST_CASE("reference network MAC counts match published totals") {
    CHECK(within(double(mac_count(infer_shapes(build_alexnet()))), 725e6, 0.05));
    CHECK(within(double(mac_count(infer_shapes(build_squeezenet_v10()))), 837e6, 0.10));
    CHECK(within(double(mac_count(infer_shapes(build_squeezenet_v11()))), 352e6, 0.10));
    CHECK(within(double(mac_count(infer_shapes(build_mobilenet()))), 574e6, 0.05));
}

TEST_CASE("SqueezeNext family counts stay within the published bands") {
    struct Anchor { const char* name; double params; double macs; };
    const Anchor anchors[] = {
        {"1.0-SqNxt-23", 0.72e6, 282e6}, {"1.0-G-SqNxt-23", 0.54e6, 0},
        {"1.0-SqNxt-23v2", 0.74e6, 228e6}, {"1.0-SqNxt-23v3", 0.74e6, 228e6},
        {"1.0-SqNxt-23v4", 0.77e6, 228e6}, {"1.0-SqNxt-23v5", 0.94e6, 228e6},
        {"2.0-SqNxt-23", 2.4e6, 749e6}, {"2.0-SqNxt-23v4", 2.56e6, 708e6},
        {"2.0-SqNxt-23v5", 3.23e6, 708e6},
    };
    for (const auto& a : anchors) {
        LayerGraph g = infer_shapes(build_variant(a.name));
        CHECK_MESSAGE(within(double(param_count(g)), a.params, 0.15), a.name, " params");
        if (a.macs > 0) CHECK_MESSAGE(within(double(mac_count(g)), a.macs, 0.15), a.name, " macs");
    }
}

TEST_CASE("depth distributions leave the MAC total nearly unchanged") {
    const std::int64_t v2 = mac_count(infer_shapes(build_variant("1.0-SqNxt-23v2")));
    for (const char* name : {"1.0-SqNxt-23v3", "1.0-SqNxt-23v4", "1.0-SqNxt-23v5"}) {
        const std::int64_t macs = mac_count(infer_shapes(build_variant(name)));
        CHECK(within(double(macs), double(v2), 0.02));
    }
}

TEST_CASE("group convolutions shrink the parameter count") {
    const std::int64_t base = param_count(infer_shapes(build_variant("1.0-SqNxt-23")));
    const std::int64_t grouped = param_count(infer_shapes(build_variant("1.0-G-SqNxt-23")));
    CHECK(grouped < base);
}

TEST_CASE("width multiplier scales parameters superlinearly") {
    const std::int64_t w10 = param_count(infer_shapes(build_variant("1.0-SqNxt-23")));
    const std::int64_t w15 = param_count(infer_shapes(build_variant("1.5-SqNxt-23")));
    const std::int64_t w20 = param_count(infer_shapes(build_variant("2.0-SqNxt-23")));
    CHECK(w15 > w10);
    CHECK(w20 > w15);
    CHECK(double(w20) > 2.5 * double(w10));
}

TEST_CASE("deeper variants grow block counts as declared") {
    const auto count_blocks = [](const std::string& name) {
        int blocks = 0;
        for (const auto& layer : build_variant(name).layers)
            if (layer.id.size() > 4 && layer.id.substr(layer.id.size() - 4) == "_add") ++blocks;
        return blocks;
    };
    CHECK(count_blocks("1.0-SqNxt-23") == 21);
    CHECK(count_blocks("1.0-SqNxt-34") == 32);
    CHECK(count_blocks("1.0-SqNxt-44") == 42);
    CHECK(count_blocks("1.0-SqNxt-23v5") == 21);
}

TEST_CASE("baseline stem and tail") {
    LayerGraph g = infer_shapes(build_variant("1.0-SqNxt-23"));
    const auto& conv1 = std::get<ConvAttrs>(g.find("conv1")->kind);
    CHECK(conv1.kernel_h == 7);
    CHECK(conv1.stride == 2);
    CHECK(conv1.out_channels == 64);
    CHECK(g.layers.back().id == "fc");
    CHECK(*g.layers.back().out_shape == TensorShape{1000, 1, 1});
    // v2-v5 swap the stem kernel to 5x5
    const auto& v5 = build_variant("1.0-SqNxt-23v5");
    CHECK(std::get<ConvAttrs>(v5.find("conv1")->kind).kernel_h == 5);
}

TEST_CASE("separable pairs alternate 1x3 and 3x1 kernels") {
    LayerGraph g = build_variant("1.0-SqNxt-23");
    int seen = 0;
    for (const auto& layer : g.layers) {
        const auto* conv = std::get_if<ConvAttrs>(&layer.kind);
        if (!conv || conv->kernel_h == conv->kernel_w) continue;
        CHECK(((conv->kernel_h == 1 && conv->kernel_w == 3) ||
               (conv->kernel_h == 3 && conv->kernel_w == 1)));
        ++seen;
    }
    CHECK(seen == 2 * 21);  // one 1x3 and one 3x1 per block
}

TEST_CASE("the two-branch expansion reproduces the fire module weight counts") {
    // squeeze s, expand e+e: the group-2 1x1 branch s->2e carries s*e weights
    // and the group-2 3x3 branch 9*s*e, matching the two canonical expand
    // halves exactly; only the bias vectors are duplicated (2e vs e+e halves).
    LayerGraph g = infer_shapes(build_squeezenet_v10());
    std::int64_t fire2 = 0;
    for (size_t i = 0; i < g.layers.size(); ++i)
        if (g.layers[i].id.rfind("fire2", 0) == 0) fire2 += per_layer_costs(g)[i].params;
    CHECK(fire2 == (96 * 16 + 16) + (16 * 64 + 128) + (9 * 16 * 64 + 128));
}

TEST_CASE("built graphs round trip through the document format") {
    for (const char* name : {"1.0-SqNxt-23", "AlexNet", "MobileNet-1.0-224"}) {
        const LayerGraph g = build_variant(name);
        CHECK(from_text(to_text(g)).structurally_equal(g));
    }
}
