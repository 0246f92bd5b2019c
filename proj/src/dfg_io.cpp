#include "redsharc/dfg.hpp"

#include <nlohmann/json.hpp>

namespace redsharc::dfg {

namespace {

using nlohmann::json;

[[noreturn]] void semantic(const std::string& what)
{
    throw Error(ErrorCode::SemanticError, "dfg: " + what);
}

EdgeKind parseKind(const json& j, const std::string& ctx)
{
    auto s = j.get<std::string>();
    if (s == "stream") {
        return EdgeKind::STREAM;
    }
    if (s == "block") {
        return EdgeKind::BLOCK;
    }
    semantic(ctx + ": kind must be \"stream\" or \"block\", got \"" + s + "\"");
}

ElementType parseType(const json& j, const std::string& ctx)
{
    auto s = j.get<std::string>();
    auto t = parseElementType(s);
    if (!t) {
        semantic(ctx + ": unknown element type \"" + s + "\"");
    }
    return *t;
}

std::pair<std::uint32_t, PortIndex> parsePortPair(const json& j, const std::string& ctx)
{
    if (!j.is_array() || j.size() != 2) {
        semantic(ctx + " must be a [kernel, port] pair");
    }
    return {j[0].get<std::uint32_t>(), j[1].get<PortIndex>()};
}

} // namespace

Dfg parseDfg(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("dfg: ") + e.what());
    }
    Dfg g;
    try {
        if (!doc.is_object() || !doc.contains("kernels")) {
            semantic("document needs a \"kernels\" array");
        }
        for (const auto& k : doc.at("kernels")) {
            g.initKernel(KernelId{k.at("id").get<std::uint32_t>()}, k.at("impl").get<std::string>(),
                         k.value("inputs", std::size_t{0}), k.value("outputs", std::size_t{0}));
        }
        for (const auto& o : doc.value("outputs", json::array())) {
            KernelId k{o.at("kernel").get<std::uint32_t>()};
            auto port = o.at("port").get<PortIndex>();
            auto ctx = "output of kernel " + std::to_string(k.value);
            auto kind = parseKind(o.at("kind"), ctx);
            auto type = parseType(o.at("type"), ctx);
            auto length = o.at("length").get<std::size_t>();
            if (kind == EdgeKind::STREAM) {
                std::optional<std::size_t> depth;
                if (o.contains("depth")) {
                    depth = o.at("depth").get<std::size_t>();
                }
                g.addOutputStream(k, port, type, length, depth);
            } else {
                auto hint = bsn::PlacementHint::AUTO;
                if (o.contains("memory")) {
                    auto h = bsn::parsePlacementHint(o.at("memory").get<std::string>());
                    if (!h) {
                        semantic(ctx + ": memory must be auto, on_chip or off_chip");
                    }
                    hint = *h;
                }
                g.addOutputBlock(k, port, type, length, hint);
            }
        }
        for (const auto& e : doc.value("edges", json::array())) {
            auto kind = parseKind(e.at("kind"), "edge");
            auto [pk, pp] = parsePortPair(e.at("from"), "edge \"from\"");
            auto [ck, cp] = parsePortPair(e.at("to"), "edge \"to\"");
            std::optional<ElementType> expected;
            if (e.contains("type")) {
                expected = parseType(e.at("type"), "edge");
            }
            if (kind == EdgeKind::STREAM) {
                g.addStreamDependency(KernelId{ck}, cp, KernelId{pk}, pp, expected);
            } else {
                g.addBlockDependency(KernelId{ck}, cp, KernelId{pk}, pp, expected);
            }
        }
    } catch (const json::exception& e) {
        semantic(e.what());
    }
    return g;
}

std::string renderDfg(const Dfg& g)
{
    nlohmann::ordered_json doc;
    doc["kernels"] = nlohmann::ordered_json::array();
    doc["edges"] = nlohmann::ordered_json::array();
    doc["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [id, n] : g.nodes()) {
        doc["kernels"].push_back({{"id", id.value}, {"impl", n.implRef}, {"inputs", n.numInputs()}, {"outputs", n.numOutputs()}});
        for (PortIndex i = 0; i < n.numInputs(); ++i) {
            const auto& b = n.inputs[i];
            if (!b) {
                continue;
            }
            nlohmann::ordered_json e{{"kind", edgeKindName(b->kind)},
                                     {"from", {b->producer.value, b->producerPort}},
                                     {"to", {id.value, i}}};
            if (b->expectedType) {
                e["type"] = elementTypeName(*b->expectedType);
            }
            doc["edges"].push_back(std::move(e));
        }
        for (PortIndex o = 0; o < n.numOutputs(); ++o) {
            const auto& d = n.outputs[o];
            if (!d) {
                continue;
            }
            nlohmann::ordered_json out{{"kernel", id.value}, {"port", o}, {"kind", edgeKindName(d->kind)},
                                       {"type", elementTypeName(d->elemType)}, {"length", d->length}};
            if (d->depth) {
                out["depth"] = *d->depth;
            }
            if (d->kind == EdgeKind::BLOCK && d->memory != bsn::PlacementHint::AUTO) {
                out["memory"] = bsn::placementHintName(d->memory);
            }
            doc["outputs"].push_back(std::move(out));
        }
    }
    return doc.dump(2) + "\n";
}

} // namespace redsharc::dfg
