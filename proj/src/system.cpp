#include "redsharc/system.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace redsharc::sysio {

namespace {

using nlohmann::json;

[[noreturn]] void semantic(const std::string& what)
{
    throw Error(ErrorCode::SemanticError, "config: " + what);
}

std::size_t lineOf(const std::string& text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void rejectUnknownKeys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            semantic(where + ": unknown field \"" + key + "\"");
        }
    }
}

std::uint64_t positive(const json& obj, const char* field, const std::string& where)
{
    if (!obj.contains(field)) {
        semantic(where + ": missing field \"" + field + "\"");
    }
    const auto& v = obj.at(field);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        semantic(where + ": \"" + field + "\" must be a non-negative integer");
    }
    auto n = v.get<std::uint64_t>();
    if (n == 0) {
        semantic(where + ": \"" + field + "\" must be positive");
    }
    return n;
}

std::uint32_t positive32(const json& obj, const char* field, const std::string& where)
{
    auto n = positive(obj, field, where);
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        semantic(where + ": \"" + field + "\" is too large");
    }
    return static_cast<std::uint32_t>(n);
}

struct CostField {
    const char* name;
    std::uint64_t perfmon::CostModel::*member;
};

constexpr CostField kCostFields[] = {
    {"push", &perfmon::CostModel::push},
    {"pop", &perfmon::CostModel::pop},
    {"peek", &perfmon::CostModel::peek},
    {"blockOnChip", &perfmon::CostModel::blockOnChip},
    {"blockOffChip", &perfmon::CostModel::blockOffChip},
    {"stall", &perfmon::CostModel::stall},
    {"contextSwitch", &perfmon::CostModel::contextSwitch},
    {"reconfig", &perfmon::CostModel::reconfig},
    {"launch", &perfmon::CostModel::launch},
    {"finish", &perfmon::CostModel::finish},
    {"free", &perfmon::CostModel::free},
    {"configure", &perfmon::CostModel::configure},
};

CoreSpec parseCore(const json& c, std::size_t index)
{
    std::string where = "cores[" + std::to_string(index) + "]";
    if (!c.is_object()) {
        semantic(where + " must be an object");
    }
    if (!c.contains("id") || !c.at("id").is_number_integer() || c.at("id").get<std::int64_t>() < 0) {
        semantic(where + ": \"id\" must be a non-negative integer");
    }
    CoreSpec spec;
    spec.id = CoreId{c.at("id").get<std::uint32_t>()};
    if (!c.contains("kind") || !c.at("kind").is_string()) {
        semantic(where + ": missing \"kind\"");
    }
    auto kind = c.at("kind").get<std::string>();
    if (kind == "processor") {
        rejectUnknownKeys(c, {"id", "kind", "dmaChannels", "maxResident"}, where);
        spec.kind = CoreKind::PROCESSOR;
        spec.dmaChannels = positive32(c, "dmaChannels", where);
        spec.maxResident = positive32(c, "maxResident", where);
    } else if (kind == "fabric_slot") {
        rejectUnknownKeys(c, {"id", "kind", "area", "streamPorts", "blockPorts"}, where);
        spec.kind = CoreKind::FABRIC_SLOT;
        spec.area = positive32(c, "area", where);
        spec.streamPorts = positive32(c, "streamPorts", where);
        spec.blockPorts = positive32(c, "blockPorts", where);
    } else {
        semantic(where + ": kind must be \"processor\" or \"fabric_slot\", got \"" + kind + "\"");
    }
    return spec;
}

} // namespace

std::string_view coreKindName(CoreKind k) noexcept
{
    return k == CoreKind::PROCESSOR ? "processor" : "fabric_slot";
}

const CoreSpec* SystemConfig::find(CoreId id) const noexcept
{
    for (const auto& c : cores) {
        if (c.id == id) {
            return &c;
        }
    }
    return nullptr;
}

SystemConfig parseConfig(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError,
                    "config: line " + std::to_string(lineOf(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
    }
    SystemConfig cfg;
    try {
        if (!doc.is_object()) {
            semantic("top level must be an object");
        }
        rejectUnknownKeys(doc, {"cores", "memory", "defaults", "costModel", "ssnStreamSlots", "interleaving"}, "config");
        if (!doc.contains("cores") || !doc.at("cores").is_array()) {
            semantic("missing \"cores\" array");
        }
        const auto& cores = doc.at("cores");
        if (cores.empty()) {
            semantic("at least one core is required");
        }
        std::set<CoreId> seen;
        for (std::size_t i = 0; i < cores.size(); ++i) {
            auto spec = parseCore(cores[i], i);
            if (!seen.insert(spec.id).second) {
                semantic("duplicate core id " + std::to_string(spec.id.value));
            }
            cfg.cores.push_back(spec);
        }
        if (!doc.contains("memory") || !doc.at("memory").is_object()) {
            semantic("missing \"memory\" object");
        }
        const auto& mem = doc.at("memory");
        rejectUnknownKeys(mem, {"onChipWords", "offChipWords"}, "memory");
        cfg.memory.onChipWords = positive(mem, "onChipWords", "memory");
        cfg.memory.offChipWords = positive(mem, "offChipWords", "memory");
        if (doc.contains("defaults")) {
            const auto& d = doc.at("defaults");
            if (!d.is_object()) {
                semantic("\"defaults\" must be an object");
            }
            rejectUnknownKeys(d, {"streamDepth"}, "defaults");
            if (d.contains("streamDepth")) {
                cfg.defaultStreamDepth = positive(d, "streamDepth", "defaults");
            }
        }
        if (doc.contains("costModel")) {
            const auto& cm = doc.at("costModel");
            if (!cm.is_object()) {
                semantic("\"costModel\" must be an object");
            }
            for (const auto& [key, value] : cm.items()) {
                auto it = std::find_if(std::begin(kCostFields), std::end(kCostFields),
                                       [&](const CostField& f) { return key == f.name; });
                if (it == std::end(kCostFields)) {
                    semantic("costModel: unknown field \"" + key + "\"");
                }
                if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
                    semantic("costModel: \"" + key + "\" must be a non-negative integer");
                }
                cfg.costModel.*(it->member) = value.get<std::uint64_t>();
            }
        }
        if (doc.contains("ssnStreamSlots")) {
            cfg.ssnStreamSlots = positive(doc, "ssnStreamSlots", "config");
        }
        if (doc.contains("interleaving")) {
            if (!doc.at("interleaving").is_boolean()) {
                semantic("\"interleaving\" must be true or false");
            }
            cfg.interleaving = doc.at("interleaving").get<bool>();
        }
    } catch (const json::exception& e) {
        semantic(e.what());
    }
    return cfg;
}

std::string renderConfig(const SystemConfig& cfg)
{
    nlohmann::ordered_json doc;
    auto cores = nlohmann::ordered_json::array();
    for (const auto& c : cfg.cores) {
        nlohmann::ordered_json j{{"id", c.id.value}, {"kind", coreKindName(c.kind)}};
        if (c.kind == CoreKind::PROCESSOR) {
            j["dmaChannels"] = c.dmaChannels;
            j["maxResident"] = c.maxResident;
        } else {
            j["area"] = c.area;
            j["streamPorts"] = c.streamPorts;
            j["blockPorts"] = c.blockPorts;
        }
        cores.push_back(std::move(j));
    }
    doc["cores"] = std::move(cores);
    doc["memory"] = {{"onChipWords", cfg.memory.onChipWords}, {"offChipWords", cfg.memory.offChipWords}};
    doc["defaults"] = {{"streamDepth", cfg.defaultStreamDepth}};
    nlohmann::ordered_json cm;
    for (const auto& f : kCostFields) {
        cm[f.name] = cfg.costModel.*(f.member);
    }
    doc["costModel"] = std::move(cm);
    doc["ssnStreamSlots"] = cfg.ssnStreamSlots;
    doc["interleaving"] = cfg.interleaving;
    return doc.dump(2) + "\n";
}

SystemConfig loadConfig(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open config file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parseConfig(ss.str());
}

// ----------------------------------------------------------------------------

CoreState::CoreState(CoreSpec spec)
    : spec_(spec), streamPortUsed_(spec.streamPortCount(), false),
      blockPortUsed_(spec.kind == CoreKind::FABRIC_SLOT ? spec.blockPorts : 0, false)
{
}

const Resident* CoreState::resident(KernelId k) const noexcept
{
    for (const auto& r : residents_) {
        if (r.kernel == k) {
            return &r;
        }
    }
    return nullptr;
}

Resident* CoreState::resident(KernelId k) noexcept
{
    for (auto& r : residents_) {
        if (r.kernel == k) {
            return &r;
        }
    }
    return nullptr;
}

std::uint32_t CoreState::activeCount() const noexcept
{
    return static_cast<std::uint32_t>(
        std::count_if(residents_.begin(), residents_.end(), [](const Resident& r) { return !r.finished; }));
}

std::uint32_t CoreState::occupiedArea() const noexcept
{
    std::uint32_t a = 0;
    for (const auto& r : residents_) {
        a += r.area;
    }
    return a;
}

std::uint32_t CoreState::activeArea() const noexcept
{
    std::uint32_t a = 0;
    for (const auto& r : residents_) {
        if (!r.finished) {
            a += r.area;
        }
    }
    return a;
}

std::uint32_t CoreState::freeResidency() const noexcept
{
    if (spec_.kind == CoreKind::FABRIC_SLOT) {
        return std::numeric_limits<std::uint32_t>::max();
    }
    auto active = activeCount();
    return active >= spec_.maxResident ? 0 : spec_.maxResident - active;
}

std::uint32_t CoreState::freeStreamPorts() const noexcept
{
    return static_cast<std::uint32_t>(std::count(streamPortUsed_.begin(), streamPortUsed_.end(), false));
}

std::uint32_t CoreState::freeBlockPorts() const noexcept
{
    if (spec_.kind == CoreKind::PROCESSOR) {
        return std::numeric_limits<std::uint32_t>::max();
    }
    return static_cast<std::uint32_t>(std::count(blockPortUsed_.begin(), blockPortUsed_.end(), false));
}

namespace {

std::vector<PortIndex> claim(std::vector<bool>& used, std::uint32_t n, CoreId core, const char* what)
{
    std::vector<PortIndex> out;
    for (PortIndex p = 0; p < used.size() && out.size() < n; ++p) {
        if (!used[p]) {
            out.push_back(p);
        }
    }
    if (out.size() < n) {
        throw Error(ErrorCode::PortLimit, "core " + std::to_string(core.value) + " has " + std::to_string(out.size()) +
                                              " free " + what + ", " + std::to_string(n) + " needed");
    }
    for (auto p : out) {
        used[p] = true;
    }
    return out;
}

} // namespace

std::vector<PortIndex> CoreState::claimStreamPorts(std::uint32_t n)
{
    return claim(streamPortUsed_, n, spec_.id, "stream ports");
}

std::vector<PortIndex> CoreState::claimBlockPorts(std::uint32_t n)
{
    if (spec_.kind == CoreKind::PROCESSOR) {
        return {};
    }
    return claim(blockPortUsed_, n, spec_.id, "block ports");
}

void CoreState::releaseStreamPorts(const std::vector<PortIndex>& ports) noexcept
{
    for (auto p : ports) {
        if (p < streamPortUsed_.size()) {
            streamPortUsed_[p] = false;
        }
    }
}

void CoreState::releaseBlockPorts(const std::vector<PortIndex>& ports) noexcept
{
    for (auto p : ports) {
        if (p < blockPortUsed_.size()) {
            blockPortUsed_[p] = false;
        }
    }
}

// ----------------------------------------------------------------------------

System::System(SystemConfig cfg)
    : config_(std::move(cfg)), ssn_(config_.ssnStreamSlots), bsn_(config_.memory.onChipWords, config_.memory.offChipWords)
{
    for (const auto& spec : config_.cores) {
        cores_.emplace_back(spec);
    }
}

CoreState& System::core(CoreId id)
{
    for (auto& c : cores_) {
        if (c.id() == id) {
            return c;
        }
    }
    throw Error(ErrorCode::UnknownCore, "core " + std::to_string(id.value));
}

const CoreState& System::core(CoreId id) const
{
    for (const auto& c : cores_) {
        if (c.id() == id) {
            return c;
        }
    }
    throw Error(ErrorCode::UnknownCore, "core " + std::to_string(id.value));
}

System generateSystem(const SystemConfig& cfg)
{
    if (cfg.cores.empty()) {
        throw Error(ErrorCode::SemanticError, "config: at least one core is required");
    }
    return System(cfg);
}

} // namespace redsharc::sysio
