#include "sqdse/netir.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace sqdse {

using ordered_json = nlohmann::ordered_json;

const char* kind_name(const LayerKind& kind) {
    switch (kind.index()) {
        case 0: return "input";
        case 1: return "conv";
        case 2: return "fc";
        case 3: return "pool";
        case 4: return "gap";
        case 5: return "add";
    }
    return "?";
}

const Layer* LayerGraph::find(const std::string& id) const {
    for (const auto& l : layers)
        if (l.id == id) return &l;
    return nullptr;
}

int LayerGraph::index_of(const std::string& id) const {
    for (size_t i = 0; i < layers.size(); ++i)
        if (layers[i].id == id) return int(i);
    return -1;
}

bool LayerGraph::structurally_equal(const LayerGraph& other) const {
    if (name != other.name || !(input_shape == other.input_shape)) return false;
    if (layers.size() != other.layers.size()) return false;
    for (size_t i = 0; i < layers.size(); ++i)
        if (!layers[i].structurally_equal(other.layers[i])) return false;
    return true;
}

TensorShape input_shape_of(const LayerGraph& graph, const Layer& layer) {
    if (std::holds_alternative<InputAttrs>(layer.kind)) return graph.input_shape;
    if (layer.inputs.empty()) throw GraphError(layer.id, "no predecessor");
    const Layer* pred = graph.find(layer.inputs.front());
    if (!pred) throw GraphError(layer.id, "unknown predecessor '" + layer.inputs.front() + "'");
    if (!pred->out_shape) throw GraphError(layer.id, "predecessor shape not inferred");
    return *pred->out_shape;
}

namespace {

int conv_out_dim(int in, int pad, int kernel, int stride) {
    return (in + 2 * pad - kernel) / stride + 1;
}

TensorShape infer_one(const LayerGraph& graph, const Layer& layer) {
    return std::visit(
        [&](const auto& attrs) -> TensorShape {
            using T = std::decay_t<decltype(attrs)>;
            if constexpr (std::is_same_v<T, InputAttrs>) {
                return graph.input_shape;
            } else if constexpr (std::is_same_v<T, ConvAttrs>) {
                TensorShape in = input_shape_of(graph, layer);
                if (attrs.stride < 1) throw GraphError(layer.id, "stride must be positive");
                if (attrs.groups < 1) throw GraphError(layer.id, "groups must be positive");
                if (in.c % attrs.groups != 0)
                    throw GraphError(layer.id, "in_channels " + std::to_string(in.c) +
                                                   " not divisible by groups " + std::to_string(attrs.groups));
                if (attrs.out_channels % attrs.groups != 0)
                    throw GraphError(layer.id, "out_channels not divisible by groups");
                int h = conv_out_dim(in.h, attrs.pad_h, attrs.kernel_h, attrs.stride);
                int w = conv_out_dim(in.w, attrs.pad_w, attrs.kernel_w, attrs.stride);
                if (h < 1 || w < 1)
                    throw GraphError(layer.id, "non-positive output dimension " + std::to_string(h) + "x" +
                                                   std::to_string(w));
                return {attrs.out_channels, h, w};
            } else if constexpr (std::is_same_v<T, FcAttrs>) {
                (void)input_shape_of(graph, layer);
                if (attrs.out_features < 1) throw GraphError(layer.id, "out_features must be positive");
                return {attrs.out_features, 1, 1};
            } else if constexpr (std::is_same_v<T, PoolAttrs>) {
                TensorShape in = input_shape_of(graph, layer);
                if (attrs.stride < 1) throw GraphError(layer.id, "stride must be positive");
                int h = conv_out_dim(in.h, attrs.pad, attrs.kernel, attrs.stride);
                int w = conv_out_dim(in.w, attrs.pad, attrs.kernel, attrs.stride);
                if (h < 1 || w < 1) throw GraphError(layer.id, "non-positive output dimension");
                return {in.c, h, w};
            } else if constexpr (std::is_same_v<T, GapAttrs>) {
                TensorShape in = input_shape_of(graph, layer);
                return {in.c, 1, 1};
            } else {  // AddAttrs
                if (layer.inputs.size() != 2)
                    throw GraphError(layer.id, "add needs exactly 2 predecessors");
                const Layer* a = graph.find(layer.inputs[0]);
                const Layer* b = graph.find(layer.inputs[1]);
                if (!a || !b) throw GraphError(layer.id, "unknown predecessor");
                if (!a->out_shape || !b->out_shape)
                    throw GraphError(layer.id, "predecessor shape not inferred");
                if (!(*a->out_shape == *b->out_shape))
                    throw GraphError(layer.id, "add operand shape mismatch");
                return *a->out_shape;
            }
        },
        layer.kind);
}

}  // namespace

LayerGraph infer_shapes(LayerGraph graph) {
    if (graph.input_shape.c < 1 || graph.input_shape.h < 1 || graph.input_shape.w < 1)
        throw GraphError("<input>", "input shape dimensions must be >= 1");
    std::unordered_set<std::string> seen;
    for (auto& layer : graph.layers) {
        if (!seen.insert(layer.id).second) throw GraphError(layer.id, "duplicate id");
        for (const auto& pred : layer.inputs)
            if (!seen.count(pred))
                throw GraphError(layer.id, "predecessor '" + pred + "' does not precede node");
        layer.out_shape = infer_one(graph, layer);
    }
    return graph;
}

std::vector<Diagnostic> validate(const LayerGraph& graph) {
    std::vector<Diagnostic> diags;
    int inputs = 0;
    std::unordered_set<std::string> seen;
    for (const auto& layer : graph.layers) {
        if (!seen.insert(layer.id).second) diags.push_back({layer.id, "duplicate id"});
        if (std::holds_alternative<InputAttrs>(layer.kind)) {
            ++inputs;
            if (!layer.inputs.empty()) diags.push_back({layer.id, "input node has predecessors"});
        } else if (layer.inputs.empty()) {
            diags.push_back({layer.id, "non-input node without predecessors"});
        }
        for (const auto& pred : layer.inputs) {
            if (graph.index_of(pred) < 0) {
                diags.push_back({layer.id, "unknown predecessor '" + pred + "'"});
            } else if (!seen.count(pred)) {
                // A predecessor at or after this node breaks topological order
                // (and a back-reference to self/later nodes would be a cycle).
                diags.push_back({layer.id, "predecessor '" + pred + "' breaks topological order"});
            }
        }
    }
    if (inputs != 1)
        diags.push_back({"<graph>", "expected exactly one input node, found " + std::to_string(inputs)});
    if (!diags.empty()) return diags;

    try {
        (void)infer_shapes(graph);
    } catch (const GraphError& e) {
        diags.push_back({e.node, e.what()});
    }
    return diags;
}

LayerCost layer_cost(const Layer& layer, const TensorShape& in_shape) {
    LayerCost cost;
    std::visit(
        [&](const auto& attrs) {
            using T = std::decay_t<decltype(attrs)>;
            if constexpr (std::is_same_v<T, ConvAttrs>) {
                std::int64_t weights = std::int64_t(attrs.kernel_h) * attrs.kernel_w *
                                       (in_shape.c / attrs.groups) * attrs.out_channels;
                cost.params = weights;
                if (attrs.bias) cost.params += attrs.out_channels;
                if (attrs.batchnorm) cost.params += 2LL * attrs.out_channels;
                if (!layer.out_shape) throw GraphError(layer.id, "shapes not inferred");
                cost.macs = std::int64_t(layer.out_shape->h) * layer.out_shape->w * attrs.kernel_h *
                            attrs.kernel_w * (in_shape.c / attrs.groups) * attrs.out_channels;
            } else if constexpr (std::is_same_v<T, FcAttrs>) {
                std::int64_t flat = in_shape.elements();
                cost.params = flat * attrs.out_features + (attrs.bias ? attrs.out_features : 0);
                cost.macs = flat * attrs.out_features;
            } else if constexpr (std::is_same_v<T, PoolAttrs> || std::is_same_v<T, AddAttrs>) {
                if (!layer.out_shape) throw GraphError(layer.id, "shapes not inferred");
                cost.elementwise = layer.out_shape->elements();
            } else if constexpr (std::is_same_v<T, GapAttrs>) {
                // Global pooling scans the whole input tensor.
                cost.elementwise = in_shape.elements();
            }
        },
        layer.kind);
    return cost;
}

std::vector<LayerCost> per_layer_costs(const LayerGraph& graph) {
    std::vector<LayerCost> costs;
    costs.reserve(graph.layers.size());
    for (const auto& layer : graph.layers) {
        if (!layer.out_shape && !std::holds_alternative<InputAttrs>(layer.kind))
            throw GraphError(layer.id, "shapes not inferred");
        TensorShape in = input_shape_of(graph, layer);
        costs.push_back(layer_cost(layer, in));
    }
    return costs;
}

std::int64_t param_count(const LayerGraph& graph) {
    std::int64_t total = 0;
    for (const auto& c : per_layer_costs(graph)) total += c.params;
    return total;
}

std::int64_t mac_count(const LayerGraph& graph) {
    std::int64_t total = 0;
    for (const auto& c : per_layer_costs(graph)) total += c.macs;
    return total;
}

namespace {

void require_keys(const ordered_json& obj, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& context) {
    for (const auto& item : obj.items()) {
        if (!required.count(item.key()) && !optional.count(item.key()))
            throw ParseError(context + ": unknown field '" + item.key() + "'");
    }
    for (const auto& key : required) {
        if (!obj.contains(key)) throw ParseError(context + ": missing required field '" + key + "'");
    }
}

}  // namespace

std::string to_text(const LayerGraph& graph) {
    ordered_json doc;
    doc["name"] = graph.name;
    doc["input"] = {{"c", graph.input_shape.c}, {"h", graph.input_shape.h}, {"w", graph.input_shape.w}};
    doc["layers"] = ordered_json::array();
    for (const auto& layer : graph.layers) {
        ordered_json node;
        node["id"] = layer.id;
        node["kind"] = kind_name(layer.kind);
        std::visit(
            [&](const auto& attrs) {
                using T = std::decay_t<decltype(attrs)>;
                if constexpr (std::is_same_v<T, ConvAttrs>) {
                    node["kernel"] = {attrs.kernel_h, attrs.kernel_w};
                    node["stride"] = attrs.stride;
                    node["pad"] = {attrs.pad_h, attrs.pad_w};
                    node["out_channels"] = attrs.out_channels;
                    node["groups"] = attrs.groups;
                    node["bias"] = attrs.bias;
                    node["bn"] = attrs.batchnorm;
                    node["relu"] = attrs.relu;
                } else if constexpr (std::is_same_v<T, FcAttrs>) {
                    node["out_features"] = attrs.out_features;
                    node["bias"] = attrs.bias;
                } else if constexpr (std::is_same_v<T, PoolAttrs>) {
                    node["pool_kind"] = attrs.kind == PoolKind::Max ? "max" : "avg";
                    node["kernel"] = attrs.kernel;
                    node["stride"] = attrs.stride;
                    node["pad"] = attrs.pad;
                }
            },
            layer.kind);
        node["inputs"] = layer.inputs;
        doc["layers"].push_back(std::move(node));
    }
    return doc.dump(2) + "\n";
}

LayerGraph from_text(const std::string& document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level must be an object");
    require_keys(doc, {"name", "input", "layers"}, {}, "document");

    LayerGraph graph;
    graph.name = doc.at("name").get<std::string>();
    const auto& in = doc.at("input");
    require_keys(in, {"c", "h", "w"}, {}, "input");
    graph.input_shape = {in.at("c").get<int>(), in.at("h").get<int>(), in.at("w").get<int>()};

    for (const auto& node : doc.at("layers")) {
        if (!node.is_object()) throw ParseError("layer entry must be an object");
        if (!node.contains("id")) throw ParseError("layer entry missing 'id'");
        std::string id = node.at("id").get<std::string>();
        std::string ctx = "layer '" + id + "'";
        if (!node.contains("kind")) throw ParseError(ctx + ": missing 'kind'");
        std::string kind = node.at("kind").get<std::string>();

        Layer layer;
        layer.id = id;
        if (kind == "input") {
            require_keys(node, {"id", "kind"}, {"inputs"}, ctx);
            layer.kind = InputAttrs{};
        } else if (kind == "conv") {
            require_keys(node, {"id", "kind", "kernel", "stride", "pad", "out_channels", "inputs"},
                         {"groups", "bias", "bn", "relu"}, ctx);
            ConvAttrs attrs;
            const auto& kernel = node.at("kernel");
            const auto& pad = node.at("pad");
            if (!kernel.is_array() || kernel.size() != 2)
                throw ParseError(ctx + ": 'kernel' must be [kh, kw]");
            if (!pad.is_array() || pad.size() != 2) throw ParseError(ctx + ": 'pad' must be [ph, pw]");
            attrs.kernel_h = kernel[0].get<int>();
            attrs.kernel_w = kernel[1].get<int>();
            attrs.stride = node.at("stride").get<int>();
            attrs.pad_h = pad[0].get<int>();
            attrs.pad_w = pad[1].get<int>();
            attrs.out_channels = node.at("out_channels").get<int>();
            attrs.groups = node.value("groups", 1);
            attrs.bias = node.value("bias", false);
            attrs.batchnorm = node.value("bn", false);
            attrs.relu = node.value("relu", false);
            layer.kind = attrs;
        } else if (kind == "fc") {
            require_keys(node, {"id", "kind", "out_features", "inputs"}, {"bias"}, ctx);
            FcAttrs attrs;
            attrs.out_features = node.at("out_features").get<int>();
            attrs.bias = node.value("bias", true);
            layer.kind = attrs;
        } else if (kind == "pool") {
            require_keys(node, {"id", "kind", "pool_kind", "kernel", "stride", "inputs"}, {"pad"}, ctx);
            PoolAttrs attrs;
            std::string pk = node.at("pool_kind").get<std::string>();
            if (pk == "max") attrs.kind = PoolKind::Max;
            else if (pk == "avg") attrs.kind = PoolKind::Avg;
            else throw ParseError(ctx + ": unknown pool_kind '" + pk + "'");
            attrs.kernel = node.at("kernel").get<int>();
            attrs.stride = node.at("stride").get<int>();
            attrs.pad = node.value("pad", 0);
            layer.kind = attrs;
        } else if (kind == "gap") {
            require_keys(node, {"id", "kind", "inputs"}, {}, ctx);
            layer.kind = GapAttrs{};
        } else if (kind == "add") {
            require_keys(node, {"id", "kind", "inputs"}, {}, ctx);
            layer.kind = AddAttrs{};
        } else {
            throw ParseError(ctx + ": unknown layer kind '" + kind + "'");
        }

        if (node.contains("inputs")) {
            for (const auto& pred : node.at("inputs")) layer.inputs.push_back(pred.get<std::string>());
        }
        graph.layers.push_back(std::move(layer));
    }
    return graph;
}

}  // namespace sqdse
