#include "redsharc/perfmon.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace redsharc::perfmon {

namespace {

constexpr std::array<std::string_view, kEventKindCount> kKindNames = {
    "PUSH", "POP", "PEEK", "BLOCK_READ", "BLOCK_WRITE", "STALL",
    "CONTEXT_SWITCH", "RECONFIG", "LAUNCH", "FINISH", "FREE", "CONFIGURE",
};

std::string csvQuote(const std::string& field)
{
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csvSplit(const std::string& line)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

std::uint64_t parseUnsigned(const std::string& s, const char* what)
{
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used);
        if (used == s.size()) {
            return v;
        }
    } catch (const std::logic_error&) {
    }
    throw Error(ErrorCode::ParseError, std::string("bad ") + what + " field '" + s + "'");
}

} // namespace

std::string_view eventKindName(EventKind k) noexcept
{
    return kKindNames[static_cast<std::size_t>(k)];
}

std::optional<EventKind> parseEventKind(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) {
            return static_cast<EventKind>(i);
        }
    }
    return std::nullopt;
}

std::uint64_t CostModel::latency(EventKind kind, std::optional<MemoryClass> mem) const noexcept
{
    switch (kind) {
    case EventKind::PUSH: return push;
    case EventKind::POP: return pop;
    case EventKind::PEEK: return peek;
    case EventKind::BLOCK_READ:
    case EventKind::BLOCK_WRITE:
        return mem.value_or(MemoryClass::ON_CHIP) == MemoryClass::OFF_CHIP ? blockOffChip : blockOnChip;
    case EventKind::STALL: return stall;
    case EventKind::CONTEXT_SWITCH: return contextSwitch;
    case EventKind::RECONFIG: return reconfig;
    case EventKind::LAUNCH: return launch;
    case EventKind::FINISH: return finish;
    case EventKind::FREE: return free;
    case EventKind::CONFIGURE: return configure;
    }
    return 0;
}

std::string resourceName(StreamId s) { return "stream:" + std::to_string(s.value); }
std::string resourceName(BlockId b) { return "block:" + std::to_string(b.value); }
std::string resourceName(CoreId c) { return "core:" + std::to_string(c.value); }

std::uint64_t CounterSnapshot::count(const std::string& resource, EventKind k) const
{
    auto it = perResource.find(resource);
    if (it == perResource.end()) {
        return 0;
    }
    auto jt = it->second.find(k);
    return jt == it->second.end() ? 0 : jt->second;
}

bool CounterSnapshot::allZero() const noexcept
{
    for (auto v : totals) {
        if (v != 0) {
            return false;
        }
    }
    return perResource.empty() && perKernel.empty() && time == 0;
}

Recorder::Recorder(RunMode mode, CostModel costs) : mode_(mode), costs_(costs) {}

void Recorder::record(EventKind kind, std::optional<KernelId> kernel, std::optional<std::string> resource,
                      std::string detail, std::optional<MemoryClass> mem)
{
    if (mode_ == RunMode::RELEASE) {
        return;
    }
    TraceEvent ev;
    ev.seq = nextSeq_++;
    ev.time = clock_;
    ev.kind = kind;
    ev.kernel = kernel;
    ev.resource = resource;
    ev.detail = std::move(detail);

    clock_ += costs_.latency(kind, mem);
    counters_.totals[static_cast<std::size_t>(kind)] += 1;
    if (resource) {
        counters_.perResource[*resource][kind] += 1;
    }
    if (kernel) {
        counters_.perKernel[*kernel][kind] += 1;
    }
    counters_.time = clock_;
    trace_.push_back(std::move(ev));
}

CounterSnapshot Recorder::snapshotCounters() const
{
    return counters_;
}

void exportTrace(std::ostream& sink, const std::vector<TraceEvent>& trace, TraceFormat format)
{
    if (format == TraceFormat::CSV) {
        sink << "seq,time,kind,kernel,resource,detail\n";
        for (const auto& ev : trace) {
            sink << ev.seq << ',' << ev.time << ',' << eventKindName(ev.kind) << ',';
            if (ev.kernel) {
                sink << ev.kernel->value;
            }
            sink << ',' << csvQuote(ev.resource.value_or("")) << ',' << csvQuote(ev.detail) << '\n';
        }
    } else {
        for (const auto& ev : trace) {
            nlohmann::ordered_json j;
            j["seq"] = ev.seq;
            j["time"] = ev.time;
            j["kind"] = eventKindName(ev.kind);
            j["kernel"] = ev.kernel ? nlohmann::ordered_json(ev.kernel->value) : nlohmann::ordered_json(nullptr);
            j["resource"] = ev.resource ? nlohmann::ordered_json(*ev.resource) : nlohmann::ordered_json(nullptr);
            j["detail"] = ev.detail;
            sink << j.dump() << '\n';
        }
    }
    if (!sink) {
        throw Error(ErrorCode::IoFailure, "failed writing trace");
    }
}

void exportTrace(const std::string& path, const std::vector<TraceEvent>& trace, TraceFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path);
    }
    exportTrace(out, trace, format);
}

std::vector<TraceEvent> parseTrace(std::istream& source, TraceFormat format)
{
    std::vector<TraceEvent> events;
    std::string line;
    if (format == TraceFormat::CSV) {
        if (!std::getline(source, line)) {
            return events;
        }
        if (line != "seq,time,kind,kernel,resource,detail") {
            throw Error(ErrorCode::ParseError, "unexpected CSV header '" + line + "'");
        }
        while (std::getline(source, line)) {
            if (line.empty()) {
                continue;
            }
            // A quoted field may span lines; an odd quote count means it is still open.
            while (std::count(line.begin(), line.end(), '"') % 2 != 0) {
                std::string more;
                if (!std::getline(source, more)) {
                    throw Error(ErrorCode::ParseError, "unterminated quoted CSV field");
                }
                line += '\n';
                line += more;
            }
            auto f = csvSplit(line);
            if (f.size() != 6) {
                throw Error(ErrorCode::ParseError, "expected 6 CSV columns in '" + line + "'");
            }
            TraceEvent ev;
            ev.seq = parseUnsigned(f[0], "seq");
            ev.time = parseUnsigned(f[1], "time");
            auto kind = parseEventKind(f[2]);
            if (!kind) {
                throw Error(ErrorCode::ParseError, "unknown event kind '" + f[2] + "'");
            }
            ev.kind = *kind;
            if (!f[3].empty()) {
                ev.kernel = KernelId{static_cast<std::uint32_t>(parseUnsigned(f[3], "kernel"))};
            }
            if (!f[4].empty()) {
                ev.resource = f[4];
            }
            ev.detail = f[5];
            events.push_back(std::move(ev));
        }
        return events;
    }

    while (std::getline(source, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(line);
            TraceEvent ev;
            ev.seq = j.at("seq").get<std::uint64_t>();
            ev.time = j.at("time").get<std::uint64_t>();
            auto kind = parseEventKind(j.at("kind").get<std::string>());
            if (!kind) {
                throw Error(ErrorCode::ParseError, "unknown event kind in '" + line + "'");
            }
            ev.kind = *kind;
            if (!j.at("kernel").is_null()) {
                ev.kernel = KernelId{j.at("kernel").get<std::uint32_t>()};
            }
            if (!j.at("resource").is_null()) {
                ev.resource = j.at("resource").get<std::string>();
            }
            ev.detail = j.at("detail").get<std::string>();
            events.push_back(std::move(ev));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("trace line: ") + e.what());
        }
    }
    return events;
}

} // namespace redsharc::perfmon
