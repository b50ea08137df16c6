#include "sqdse/zoo.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace sqdse {

namespace {

struct GraphBuilder {
    LayerGraph graph;
    std::string prev;

    void input(int c, int h, int w) {
        graph.input_shape = {c, h, w};
        graph.layers.push_back({"input", InputAttrs{}, {}, {}});
        prev = "input";
    }

    std::string conv(const std::string& id, int kh, int kw, int stride, int ph, int pw, int out_c,
                     int groups, bool bias, bool bn, bool relu, const std::string& from = "") {
        ConvAttrs attrs;
        attrs.kernel_h = kh;
        attrs.kernel_w = kw;
        attrs.stride = stride;
        attrs.pad_h = ph;
        attrs.pad_w = pw;
        attrs.out_channels = out_c;
        attrs.groups = groups;
        attrs.bias = bias;
        attrs.batchnorm = bn;
        attrs.relu = relu;
        graph.layers.push_back({id, attrs, {from.empty() ? prev : from}, {}});
        prev = id;
        return id;
    }

    std::string pool(const std::string& id, PoolKind kind, int kernel, int stride, int pad = 0) {
        graph.layers.push_back({id, PoolAttrs{kind, kernel, stride, pad}, {prev}, {}});
        prev = id;
        return id;
    }

    std::string gap(const std::string& id) {
        graph.layers.push_back({id, GapAttrs{}, {prev}, {}});
        prev = id;
        return id;
    }

    std::string fc(const std::string& id, int out_features, bool bias = true) {
        graph.layers.push_back({id, FcAttrs{out_features, bias}, {prev}, {}});
        prev = id;
        return id;
    }

    std::string add(const std::string& id, const std::string& a, const std::string& b) {
        graph.layers.push_back({id, AddAttrs{}, {a, b}, {}});
        prev = id;
        return id;
    }
};

int scaled(int base, double mult) { return int(std::lround(base * mult)); }

void check_channels(int value, const std::string& where, int group_size) {
    if (value < 1 || value < group_size || value % group_size != 0)
        throw ZooError("non-integral or too-small channel count at " + where + ": " +
                       std::to_string(value));
}

}  // namespace

LayerGraph build_squeezenext(const SqueezeNextSpec& spec) {
    if (spec.width_mult <= 0) throw ZooError("width_mult must be positive");
    if (spec.group_size != 1 && spec.group_size != 2) throw ZooError("group_size must be 1 or 2");
    if (spec.conv1_kernel != 7 && spec.conv1_kernel != 5) throw ZooError("conv1_kernel must be 7 or 5");
    for (int d : spec.depth_dist)
        if (d < 1) throw ZooError("depth_dist entries must be positive");

    GraphBuilder b;
    b.input(3, 227, 227);
    b.conv("conv1", spec.conv1_kernel, spec.conv1_kernel, spec.conv1_stride, 0, 0,
           spec.conv1_channels, 1, true, true, true);
    b.pool("pool1", PoolKind::Max, 3, 2);

    int channels = spec.conv1_channels;
    int block_counter = 0;
    for (int stage = 0; stage < 4; ++stage) {
        int width = scaled(spec.stage_widths[stage], spec.width_mult);
        for (int blk = 0; blk < spec.depth_dist[stage]; ++blk) {
            std::string tag = "s" + std::to_string(stage + 1) + "_b" + std::to_string(blk) + "_";
            int stride = (stage > 0 && blk == 0) ? 2 : 1;

            // Bottleneck reduction depth depends on the block role: stride-2
            // blocks keep the full channel count through the first 1x1,
            // channel-shrinking blocks squeeze by 4, regular blocks by 2.
            int red;
            bool resize;
            if (stride == 2) {
                red = 1;
                resize = true;
            } else if (channels != width) {
                red = channels > width ? 4 : 2;
                resize = true;
            } else {
                red = 2;
                resize = false;
            }

            int mid = channels / red;
            int narrow = mid / 2;
            check_channels(mid, tag + "mid", spec.group_size);
            check_channels(narrow, tag + "narrow", spec.group_size);
            if (mid * red != channels || narrow * 2 != mid)
                throw ZooError("non-integral channel after division at " + tag);

            std::string skip_from = b.prev;
            int g = spec.group_size;
            b.conv(tag + "a", 1, 1, stride, 0, 0, mid, g, true, true, true);
            b.conv(tag + "b", 1, 1, 1, 0, 0, narrow, g, true, true, true);
            // The separable pair order alternates block to block.
            if (block_counter % 2 == 0) {
                b.conv(tag + "c", 1, 3, 1, 0, 1, mid, 1, true, true, true);
                b.conv(tag + "d", 3, 1, 1, 1, 0, mid, 1, true, true, true);
            } else {
                b.conv(tag + "c", 3, 1, 1, 1, 0, mid, 1, true, true, true);
                b.conv(tag + "d", 1, 3, 1, 0, 1, mid, 1, true, true, true);
            }
            std::string main = b.conv(tag + "e", 1, 1, 1, 0, 0, width, g, true, true, true);

            std::string skip = skip_from;
            if (resize)
                skip = b.conv(tag + "proj", 1, 1, stride, 0, 0, width, 1, true, true, false, skip_from);
            b.add(tag + "add", main, skip);

            channels = width;
            ++block_counter;
        }
    }

    b.conv("bneck", 1, 1, 1, 0, 0, scaled(spec.fc_bottleneck_base, spec.width_mult), 1, true, true,
           true);
    b.gap("gap");
    b.fc("fc", spec.num_classes);
    return b.graph;
}

LayerGraph build_alexnet() {
    GraphBuilder b;
    b.graph.name = "AlexNet";
    b.input(3, 227, 227);
    b.conv("conv1", 11, 11, 4, 0, 0, 96, 1, true, false, true);
    b.pool("pool1", PoolKind::Max, 3, 2);
    b.conv("conv2", 5, 5, 1, 2, 2, 256, 2, true, false, true);
    b.pool("pool2", PoolKind::Max, 3, 2);
    b.conv("conv3", 3, 3, 1, 1, 1, 384, 1, true, false, true);
    b.conv("conv4", 3, 3, 1, 1, 1, 384, 2, true, false, true);
    b.conv("conv5", 3, 3, 1, 1, 1, 256, 2, true, false, true);
    b.pool("pool5", PoolKind::Max, 3, 2);
    b.fc("fc6", 4096);
    b.fc("fc7", 4096);
    b.fc("fc8", 1000);
    return b.graph;
}

namespace {

// Fire block. The published module concatenates a 1x1 and a 3x3 expand of
// equal width e; with no concat node in the IR, two group-2 expand branches of
// width 2e joined by an add reproduce the same parameter and MAC totals and
// the same output channel count.
void fire(GraphBuilder& b, const std::string& id, int squeeze, int expand) {
    b.conv(id + "_sq", 1, 1, 1, 0, 0, squeeze, 1, true, false, true);
    std::string sq = b.prev;
    std::string e1 = b.conv(id + "_e1", 1, 1, 1, 0, 0, 2 * expand, 2, true, false, true, sq);
    std::string e3 = b.conv(id + "_e3", 3, 3, 1, 1, 1, 2 * expand, 2, true, false, true, sq);
    b.add(id + "_out", e1, e3);
}

}  // namespace

LayerGraph build_squeezenet_v10() {
    GraphBuilder b;
    b.graph.name = "SqueezeNet-v1.0";
    b.input(3, 227, 227);
    b.conv("conv1", 7, 7, 2, 0, 0, 96, 1, true, false, true);
    b.pool("pool1", PoolKind::Max, 3, 2);
    fire(b, "fire2", 16, 64);
    fire(b, "fire3", 16, 64);
    fire(b, "fire4", 32, 128);
    b.pool("pool4", PoolKind::Max, 3, 2);
    fire(b, "fire5", 32, 128);
    fire(b, "fire6", 48, 192);
    fire(b, "fire7", 48, 192);
    fire(b, "fire8", 64, 256);
    b.pool("pool8", PoolKind::Max, 3, 2);
    fire(b, "fire9", 64, 256);
    b.conv("conv10", 1, 1, 1, 0, 0, 1000, 1, true, false, true);
    b.gap("gap");
    return b.graph;
}

LayerGraph build_squeezenet_v11() {
    GraphBuilder b;
    b.graph.name = "SqueezeNet-v1.1";
    b.input(3, 227, 227);
    b.conv("conv1", 3, 3, 2, 0, 0, 64, 1, true, false, true);
    b.pool("pool1", PoolKind::Max, 3, 2);
    fire(b, "fire2", 16, 64);
    fire(b, "fire3", 16, 64);
    b.pool("pool3", PoolKind::Max, 3, 2);
    fire(b, "fire4", 32, 128);
    fire(b, "fire5", 32, 128);
    b.pool("pool5", PoolKind::Max, 3, 2);
    fire(b, "fire6", 48, 192);
    fire(b, "fire7", 48, 192);
    fire(b, "fire8", 64, 256);
    fire(b, "fire9", 64, 256);
    b.conv("conv10", 1, 1, 1, 0, 0, 1000, 1, true, false, true);
    b.gap("gap");
    return b.graph;
}

LayerGraph build_mobilenet() {
    GraphBuilder b;
    b.graph.name = "MobileNet-1.0-224";
    b.input(3, 224, 224);
    b.conv("conv1", 3, 3, 2, 1, 1, 32, 1, false, true, true);

    struct Stage { int out_c; int stride; };
    const Stage stages[] = {{64, 1},  {128, 2}, {128, 1}, {256, 2}, {256, 1},
                            {512, 2}, {512, 1}, {512, 1}, {512, 1}, {512, 1},
                            {512, 1}, {1024, 2}, {1024, 1}};
    int channels = 32;
    int idx = 2;
    for (const auto& st : stages) {
        std::string n = std::to_string(idx++);
        b.conv("dw" + n, 3, 3, st.stride, 1, 1, channels, channels, false, true, true);
        b.conv("pw" + n, 1, 1, 1, 0, 0, st.out_c, 1, false, true, true);
        channels = st.out_c;
    }
    b.gap("gap");
    b.fc("fc", 1000);
    return b.graph;
}

namespace {

SqueezeNextSpec sqnxt_spec(double width, std::array<int, 4> depth, int conv1_kernel, int group_size) {
    SqueezeNextSpec spec;
    spec.width_mult = width;
    spec.depth_dist = depth;
    spec.conv1_kernel = conv1_kernel;
    spec.group_size = group_size;
    return spec;
}

LayerGraph named(LayerGraph g, const std::string& name) {
    g.name = name;
    return g;
}

}  // namespace

LayerGraph build_variant(const std::string& name) {
    struct SqnxtDef { const char* name; double width; std::array<int, 4> depth; int k; int g; };
    static const SqnxtDef defs[] = {
        {"1.0-SqNxt-23", 1.0, {6, 6, 8, 1}, 7, 1},
        {"1.0-G-SqNxt-23", 1.0, {6, 6, 8, 1}, 7, 2},
        {"1.0-SqNxt-23v2", 1.0, {6, 6, 8, 1}, 5, 1},
        {"1.0-SqNxt-23v3", 1.0, {4, 8, 8, 1}, 5, 1},
        {"1.0-SqNxt-23v4", 1.0, {2, 10, 8, 1}, 5, 1},
        {"1.0-SqNxt-23v5", 1.0, {2, 4, 14, 1}, 5, 1},
        {"1.0-SqNxt-34", 1.0, {8, 10, 13, 1}, 7, 1},
        {"1.0-SqNxt-44", 1.0, {10, 14, 17, 1}, 7, 1},
        {"1.5-SqNxt-23", 1.5, {6, 6, 8, 1}, 7, 1},
        {"1.5-SqNxt-34", 1.5, {8, 10, 13, 1}, 7, 1},
        {"1.5-SqNxt-44", 1.5, {10, 14, 17, 1}, 7, 1},
        {"2.0-SqNxt-23", 2.0, {6, 6, 8, 1}, 7, 1},
        {"2.0-SqNxt-34", 2.0, {8, 10, 13, 1}, 7, 1},
        {"2.0-SqNxt-44", 2.0, {10, 14, 17, 1}, 7, 1},
        {"2.0-SqNxt-23v4", 2.0, {2, 10, 8, 1}, 5, 1},
        {"2.0-SqNxt-23v5", 2.0, {2, 4, 14, 1}, 5, 1},
    };
    for (const auto& def : defs) {
        if (name == def.name)
            return named(build_squeezenext(sqnxt_spec(def.width, def.depth, def.k, def.g)), name);
    }
    if (name == "AlexNet") return build_alexnet();
    if (name == "SqueezeNet-v1.0") return build_squeezenet_v10();
    if (name == "SqueezeNet-v1.1") return build_squeezenet_v11();
    if (name == "MobileNet-1.0-224") return build_mobilenet();
    throw ZooError("unknown network '" + name + "'");
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"1.0-SqNxt-23", "baseline, depth [6,6,8,1], 7x7 stem", 0.72e6, 282e6, "estimation2"},
        {"1.0-G-SqNxt-23", "baseline with group-2 1x1 convs", 0.54e6, 0, "alexnet"},
        {"1.0-SqNxt-23v2", "5x5 stem", 0.74e6, 228e6, "estimation2"},
        {"1.0-SqNxt-23v3", "5x5 stem, depth [4,8,8,1]", 0.74e6, 228e6, "estimation2"},
        {"1.0-SqNxt-23v4", "5x5 stem, depth [2,10,8,1]", 0.77e6, 228e6, "estimation2"},
        {"1.0-SqNxt-23v5", "5x5 stem, depth [2,4,14,1]", 0.94e6, 228e6, "estimation2"},
        {"1.0-SqNxt-34", "deeper, depth [8,10,13,1]", 1.0e6, 0, "alexnet"},
        {"1.0-SqNxt-44", "deeper, depth [10,14,17,1]", 1.2e6, 0, "alexnet"},
        {"1.5-SqNxt-23", "1.5x wider baseline", 1.4e6, 0, "vgg"},
        {"1.5-SqNxt-34", "1.5x wider, 34 modules", 2.1e6, 0, "vgg"},
        {"1.5-SqNxt-44", "1.5x wider, 44 modules", 2.6e6, 0, "vgg"},
        {"2.0-SqNxt-23", "2x wider baseline", 2.4e6, 749e6, "estimation2"},
        {"2.0-SqNxt-34", "2x wider, 34 modules", 3.8e6, 0, "vgg"},
        {"2.0-SqNxt-44", "2x wider, 44 modules", 4.4e6, 0, "vgg"},
        {"2.0-SqNxt-23v4", "2x wider v4", 2.56e6, 708e6, "estimation2"},
        {"2.0-SqNxt-23v5", "2x wider v5", 3.23e6, 708e6, "estimation2"},
        {"AlexNet", "reference network", 60.9e6, 725e6, "estimation2"},
        {"SqueezeNet-v1.0", "reference network", 1.2e6, 837e6, "estimation2"},
        {"SqueezeNet-v1.1", "reference network", 1.2e6, 352e6, "estimation2"},
        {"MobileNet-1.0-224", "reference network", 4.2e6, 574e6, "estimation2"},
    };
    return entries;
}

namespace {

std::string millions(double v) {
    if (v <= 0) return "-";
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(v < 10e6 ? 2 : 0);
    out << v / 1e6 << "M";
    return out.str();
}

}  // namespace

std::string catalog_to_text() {
    std::vector<std::array<std::string, 5>> rows;
    rows.push_back({"name", "params", "macs", "source", "description"});
    for (const auto& e : catalog())
        rows.push_back({e.name, millions(e.expected_params), millions(e.expected_macs),
                        e.source_table, e.description});
    std::array<size_t, 5> widths{};
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    std::ostringstream out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << std::string(widths[i] - row[i].size() + 2, ' ');
        out << '\n';
    }
    return out.str();
}

}  // namespace sqdse
