#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace redsharc;
using namespace redsharc::sysio;

namespace {

ErrorCode codeOf(const std::string& text)
{
    try {
        (void)parseConfig(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted: " << text;
    return ErrorCode::InvalidArgument;
}

const char* kMinimal =
    R"({"cores":[{"id":0,"kind":"processor","dmaChannels":4,"maxResident":4}],)"
    R"("memory":{"onChipWords":16384,"offChipWords":1048576}})";

// Two processors and two fabric slots on shared networks.
const char* kMixed = R"({
  "cores": [
    {"id": 0, "kind": "processor", "dmaChannels": 4, "maxResident": 2},
    {"id": 1, "kind": "processor", "dmaChannels": 2, "maxResident": 1},
    {"id": 2, "kind": "fabric_slot", "area": 100, "streamPorts": 4, "blockPorts": 2},
    {"id": 3, "kind": "fabric_slot", "area": 60, "streamPorts": 2, "blockPorts": 2}
  ],
  "memory": {"onChipWords": 4096, "offChipWords": 65536},
  "defaults": {"streamDepth": 8},
  "costModel": {"reconfig": 250, "blockOffChip": 20},
  "ssnStreamSlots": 32,
  "interleaving": false
})";

} // namespace

TEST(ParseConfig, MinimalIsValid)
{
    const auto cfg = parseConfig(kMinimal);
    ASSERT_EQ(cfg.cores.size(), 1u);
    EXPECT_EQ(cfg.cores[0].kind, CoreKind::PROCESSOR);
    EXPECT_EQ(cfg.cores[0].dmaChannels, 4u);
    EXPECT_EQ(cfg.memory.onChipWords, 16384u);
    EXPECT_EQ(cfg.ssnStreamSlots, 64u);
    EXPECT_EQ(cfg.defaultStreamDepth, 16u);
    EXPECT_TRUE(cfg.interleaving);
    EXPECT_EQ(cfg.costModel, perfmon::CostModel{});
}

TEST(ParseConfig, MixedProcessorsAndSlots)
{
    const auto cfg = parseConfig(kMixed);
    ASSERT_EQ(cfg.cores.size(), 4u);
    EXPECT_EQ(cfg.cores[2].kind, CoreKind::FABRIC_SLOT);
    EXPECT_EQ(cfg.cores[3].area, 60u);
    EXPECT_EQ(cfg.defaultStreamDepth, 8u);
    EXPECT_EQ(cfg.costModel.reconfig, 250u);
    EXPECT_EQ(cfg.costModel.blockOffChip, 20u);
    EXPECT_EQ(cfg.costModel.push, 1u);
    EXPECT_EQ(cfg.ssnStreamSlots, 32u);
    EXPECT_FALSE(cfg.interleaving);
    EXPECT_EQ(cfg.find(CoreId{3})->streamPorts, 2u);
    EXPECT_EQ(cfg.find(CoreId{9}), nullptr);
}

TEST(ParseConfig, SemanticErrors)
{
    EXPECT_EQ(codeOf(R"({"cores":[],"memory":{"onChipWords":1,"offChipWords":1}})"), ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"processor","dmaChannels":4,"maxResident":4},)"
                     R"({"id":0,"kind":"processor","dmaChannels":4,"maxResident":4}],)"
                     R"("memory":{"onChipWords":1,"offChipWords":1}})"),
              ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"processor","dmaChannels":4}],)"
                     R"("memory":{"onChipWords":1,"offChipWords":1}})"),
              ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"fabric_slot","area":0,"streamPorts":1,"blockPorts":1}],)"
                     R"("memory":{"onChipWords":1,"offChipWords":1}})"),
              ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"gpu"}],"memory":{"onChipWords":1,"offChipWords":1}})"),
              ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"processor","dmaChannels":4,"maxResident":4}]})"),
              ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"processor","dmaChannels":4,"maxResident":4}],)"
                     R"("memory":{"onChipWords":0,"offChipWords":1}})"),
              ErrorCode::SemanticError);
    EXPECT_EQ(codeOf(R"({"cores":[{"id":0,"kind":"processor","dmaChannels":4,"maxResident":4}],)"
                     R"("memory":{"onChipWords":1,"offChipWords":1},"extra":1})"),
              ErrorCode::SemanticError);
}

TEST(ParseConfig, MalformedJsonNamesLine)
{
    try {
        (void)parseConfig("{\n\"cores\": [\n,]\n}");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ParseConfig, RenderParseIdentity)
{
    for (const char* text : {kMinimal, kMixed}) {
        const auto cfg = parseConfig(text);
        const auto rendered = renderConfig(cfg);
        EXPECT_EQ(parseConfig(rendered), cfg);
        EXPECT_EQ(renderConfig(parseConfig(rendered)), rendered);
    }
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto cfg = fixtures::randomConfig(seed);
        EXPECT_EQ(parseConfig(renderConfig(cfg)), cfg);
    }
}

TEST(ParseConfig, LoadMissingFile)
{
    try {
        (void)loadConfig("/nonexistent/config.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoFailure);
    }
}

TEST(GenerateSystem, MirrorsConfig)
{
    const auto cfg = parseConfig(kMixed);
    const auto sys = generateSystem(cfg);
    EXPECT_EQ(sys.config(), cfg);
    EXPECT_EQ(sys.ssn().slotCapacity(), 32u);
    EXPECT_EQ(sys.ssn().freeSlots(), 32u);
    EXPECT_EQ(sys.bsn().pools().onChipCapacityWords, 4096u);
    EXPECT_EQ(sys.bsn().pools().offChipCapacityWords, 65536u);
    EXPECT_EQ(sys.bsn().pools().freeWords(MemoryClass::ON_CHIP), 4096u);
    EXPECT_EQ(sys.bsn().pools().freeWords(MemoryClass::OFF_CHIP), 65536u);
    ASSERT_EQ(sys.cores().size(), 4u);
    for (std::size_t i = 0; i < cfg.cores.size(); ++i) {
        const auto& core = sys.cores()[i];
        EXPECT_EQ(core.spec(), cfg.cores[i]);
        EXPECT_TRUE(core.residents().empty());
        EXPECT_EQ(core.freeStreamPorts(), cfg.cores[i].streamPortCount());
    }
    EXPECT_EQ(sys.core(CoreId{2}).freeBlockPorts(), 2u);
    EXPECT_THROW((void)sys.core(CoreId{7}), Error);
}

TEST(GenerateSystem, IsPure)
{
    const auto cfg = fixtures::randomConfig(5);
    const auto a = generateSystem(cfg);
    const auto b = generateSystem(cfg);
    EXPECT_EQ(a.config(), b.config());
    EXPECT_EQ(a.ssn().freeSlots(), b.ssn().freeSlots());
    EXPECT_EQ(a.bsn().pools().onChipUsed, b.bsn().pools().onChipUsed);
    EXPECT_EQ(a.cores().size(), b.cores().size());
}

TEST(CoreState, PortClaimsAndResidency)
{
    CoreState slotState(fixtures::slot(1, 50, 3, 2));
    EXPECT_EQ(slotState.claimStreamPorts(2), (std::vector<PortIndex>{0, 1}));
    EXPECT_EQ(slotState.freeStreamPorts(), 1u);
    EXPECT_THROW(slotState.claimStreamPorts(2), Error);
    slotState.releaseStreamPorts({0});
    EXPECT_EQ(slotState.claimStreamPorts(2), (std::vector<PortIndex>{0, 2}));
    EXPECT_EQ(slotState.freeResidency(), UINT32_MAX);

    CoreState proc(fixtures::processor(0, 2, 3));
    EXPECT_EQ(proc.freeResidency(), 3u);
    proc.residents().push_back({KernelId{1}, "SRC", 0, false});
    proc.residents().push_back({KernelId{2}, "SRC", 0, true});
    EXPECT_EQ(proc.activeCount(), 1u);
    EXPECT_NE(proc.resident(KernelId{2}), nullptr);
}

TEST(CoreState, AreaAccounting)
{
    CoreState s(fixtures::slot(1, 100));
    s.residents().push_back({KernelId{1}, "A", 40, true});
    s.residents().push_back({KernelId{2}, "B", 30, false});
    EXPECT_EQ(s.occupiedArea(), 70u);
    EXPECT_EQ(s.activeArea(), 30u);
}
