#include "redsharc/eigenfaces/pipeline.hpp"

#include <algorithm>

namespace redsharc::eigenfaces {

using kernelapi::KernelTask;
using kernelapi::TaskContext;

std::size_t defaultComponents(std::size_t trainingImages) noexcept
{
    return std::max<std::size_t>(1, std::min<std::size_t>(trainingImages - 1, 8));
}

namespace {

struct Inputs {
    PipelineParams p;
    ImageMatrix images; // training rows first, then samples
};

Inputs stackImages(const Dataset& d, std::optional<std::size_t> k)
{
    checkDataset(d);
    Inputs in;
    in.p.M = d.trainingImages();
    in.p.N = d.pixels();
    in.p.S = d.samples.size();
    in.p.k = k.value_or(defaultComponents(in.p.M));
    const std::size_t r = std::min(in.p.M, in.p.N);
    if (in.p.k < 1 || in.p.k > r) {
        throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(in.p.k) + " outside [1, " + std::to_string(r) + "]");
    }
    in.images = ImageMatrix(in.p.totalImages(), in.p.N);
    std::size_t row = 0;
    auto put = [&](const std::vector<double>& img) {
        std::copy(img.begin(), img.end(), in.images.data.begin() + static_cast<std::ptrdiff_t>(row * in.p.N));
        ++row;
    };
    for (const auto& s : d.subjects) {
        for (const auto& img : s.images) {
            put(img);
        }
    }
    for (const auto& img : d.samples) {
        put(img);
    }
    return in;
}

struct Features {
    std::vector<FeatureVector> refs;
    std::vector<FeatureVector> samples;
};

// Shared by the projection kernel and the oracle so both do identical arithmetic.
Features featuresFromCentered(const ImageMatrix& centered, const PipelineParams& p)
{
    Matrix a(p.N, p.M);
    for (std::size_t i = 0; i < p.M; ++i) {
        for (std::size_t j = 0; j < p.N; ++j) {
            a(j, i) = centered(i, j);
        }
    }
    const Matrix basis = selectComponents(svd(a), p.k);
    Features f;
    for (std::size_t i = 0; i < p.M; ++i) {
        f.refs.push_back(project(basis, centered.row(i)));
    }
    for (std::size_t s = 0; s < p.S; ++s) {
        f.samples.push_back(project(basis, centered.row(p.M + s)));
    }
    return f;
}

using Shared = std::shared_ptr<const Inputs>;

KernelTask sourceKernel(TaskContext& ctx, Shared in)
{
    const auto& p = in->p;
    const auto pixels = ctx.outputStream(0);
    const auto dataset = ctx.outputBlock(1);
    for (std::size_t i = 0; i < p.totalImages(); ++i) {
        for (std::size_t j = 0; j < p.N; ++j) {
            ctx.blockWrite(dataset, i * p.N + j, Element::f64(in->images(i, j)));
        }
    }
    for (std::size_t i = 0; i < p.M; ++i) {
        for (std::size_t j = 0; j < p.N; ++j) {
            co_await ctx.streamPush(pixels, Element::f64(in->images(i, j)));
        }
    }
    ctx.notifyKernelFinished();
}

// Emits the mean once per (image, pixel) so the subtract kernel pops it in lockstep.
KernelTask meanKernel(TaskContext& ctx, PipelineParams p)
{
    const auto pixels = ctx.inputStream(0);
    const auto out = ctx.outputStream(0);
    ImageMatrix training(p.M, p.N);
    for (double& x : training.data) {
        x = (co_await ctx.streamPop(pixels)).as<double>();
    }
    const auto mean = computeMean(training);
    for (std::size_t i = 0; i < p.totalImages(); ++i) {
        for (std::size_t j = 0; j < p.N; ++j) {
            co_await ctx.streamPush(out, Element::f64(mean[j]));
        }
    }
    ctx.notifyKernelFinished();
}

KernelTask prepareKernel(TaskContext& ctx, PipelineParams p)
{
    const auto src = ctx.inputBlock(0);
    const auto dst = ctx.outputBlock(0);
    for (std::size_t i = 0; i < p.totalImages(); ++i) {
        for (std::size_t j = 0; j < p.N; ++j) {
            ctx.blockWrite(dst, i * p.N + j, ctx.blockRead(src, i * p.N + j));
        }
        ctx.setDebugValue(static_cast<std::uint32_t>(i + 1));
    }
    ctx.notifyKernelFinished();
    co_return;
}

KernelTask subtractKernel(TaskContext& ctx, PipelineParams p)
{
    const auto images = ctx.inputBlock(1);
    const auto mean = ctx.inputStream(0);
    const auto diff = ctx.outputStream(0);
    for (std::size_t i = 0; i < p.totalImages(); ++i) {
        for (std::size_t j = 0; j < p.N; ++j) {
            const double pixel = ctx.blockRead(images, i * p.N + j).as<double>();
            const double avg = (co_await ctx.streamPop(mean)).as<double>();
            co_await ctx.streamPush(diff, Element::f64(pixel - avg));
        }
    }
    ctx.notifyKernelFinished();
}

KernelTask projectKernel(TaskContext& ctx, PipelineParams p)
{
    const auto diff = ctx.inputStream(0);
    const auto refsOut = ctx.outputBlock(0);
    const auto samplesOut = ctx.outputStream(1);
    ImageMatrix centered(p.totalImages(), p.N);
    for (double& x : centered.data) {
        x = (co_await ctx.streamPop(diff)).as<double>();
    }
    const auto f = featuresFromCentered(centered, p);
    for (std::size_t i = 0; i < p.M; ++i) {
        for (std::size_t c = 0; c < p.k; ++c) {
            ctx.blockWrite(refsOut, i * p.k + c, Element::f64(f.refs[i][c]));
        }
    }
    for (const auto& w : f.samples) {
        for (double x : w) {
            co_await ctx.streamPush(samplesOut, Element::f64(x));
        }
    }
    ctx.notifyKernelFinished();
}

KernelTask matchKernel(TaskContext& ctx, PipelineParams p)
{
    const auto refsIn = ctx.inputBlock(0);
    const auto samplesIn = ctx.inputStream(1);
    const auto refOut = ctx.outputStream(0);
    const auto distOut = ctx.outputStream(1);
    std::vector<FeatureVector> refs(p.M, FeatureVector(p.k));
    for (std::size_t i = 0; i < p.M; ++i) {
        for (std::size_t c = 0; c < p.k; ++c) {
            refs[i][c] = ctx.blockRead(refsIn, i * p.k + c).as<double>();
        }
    }
    for (std::size_t s = 0; s < p.S; ++s) {
        FeatureVector w(p.k);
        for (double& x : w) {
            x = (co_await ctx.streamPop(samplesIn)).as<double>();
        }
        const auto m = classify(w, refs);
        co_await ctx.streamPush(refOut, Element::u32(static_cast<std::uint32_t>(m.reference)));
        co_await ctx.streamPush(distOut, Element::f64(m.distance));
    }
    ctx.notifyKernelFinished();
}

std::vector<std::uint32_t> referenceSubjectsOf(const Dataset& d)
{
    std::vector<std::uint32_t> out;
    for (const auto& s : d.subjects) {
        out.insert(out.end(), s.images.size(), s.id);
    }
    return out;
}

} // namespace

EigenfacesApp buildEigenfacesDfg(const Dataset& dataset, kernelapi::KernelRegistry& registry,
                                 std::optional<std::size_t> k)
{
    auto shared = std::make_shared<const Inputs>(stackImages(dataset, k));
    const PipelineParams p = shared->p;
    using kernelapi::ImplKind;
    registry.registerKernelImpl("EF_SOURCE", ImplKind::SW, [shared](TaskContext& c) { return sourceKernel(c, shared); });
    registry.registerKernelImpl("EF_MEAN", ImplKind::SW, [p](TaskContext& c) { return meanKernel(c, p); });
    registry.registerKernelImpl("EF_PREPARE", ImplKind::HW, [p](TaskContext& c) { return prepareKernel(c, p); },
                                kPrepareArea);
    registry.registerKernelImpl("EF_SUBTRACT", ImplKind::SW, [p](TaskContext& c) { return subtractKernel(c, p); });
    registry.registerKernelImpl("EF_PROJECT", ImplKind::HW, [p](TaskContext& c) { return projectKernel(c, p); },
                                kProjectArea);
    registry.registerKernelImpl("EF_MATCH", ImplKind::SW, [p](TaskContext& c) { return matchKernel(c, p); });

    namespace id = kernel_ids;
    const auto T = ElementType::DOUBLE;
    EigenfacesApp app;
    app.params = p;
    app.referenceSubjects = referenceSubjectsOf(dataset);
    auto& g = app.graph;
    g.initKernel(id::source, "EF_SOURCE", 0, 2);
    g.initKernel(id::mean, "EF_MEAN", 1, 1);
    g.initKernel(id::prepare, "EF_PREPARE", 1, 1);
    g.initKernel(id::subtract, "EF_SUBTRACT", 2, 1);
    g.initKernel(id::project, "EF_PROJECT", 1, 2);
    g.initKernel(id::match, "EF_MATCH", 2, 2);

    g.addOutputStream(id::source, 0, T, p.M * p.N);
    g.addOutputBlock(id::source, 1, T, p.totalImages() * p.N);
    g.addStreamDependency(id::mean, 0, id::source, 0, T);
    g.addBlockDependency(id::prepare, 0, id::source, 1, T);

    g.addOutputStream(id::mean, 0, T, p.N * p.totalImages());
    g.addOutputBlock(id::prepare, 0, T, p.totalImages() * p.N);

    g.addStreamDependency(id::subtract, 0, id::mean, 0, T);
    g.addBlockDependency(id::subtract, 1, id::prepare, 0, T);
    g.addOutputStream(id::subtract, 0, T, p.N * p.totalImages());

    g.addStreamDependency(id::project, 0, id::subtract, 0, T);
    g.addOutputBlock(id::project, 0, T, p.M * p.k);
    // The match kernel waits for the reference block, so every sample feature must fit in the FIFO.
    g.addOutputStream(id::project, 1, T, p.S * p.k, p.S * p.k);

    g.addBlockDependency(id::match, 0, id::project, 0, T);
    g.addStreamDependency(id::match, 1, id::project, 1, T);
    g.addOutputStream(id::match, 0, ElementType::U32, p.S);
    g.addOutputStream(id::match, 1, T, p.S);
    return app;
}

std::vector<MatchResult> pipelineResults(const control::RunReport& report, const EigenfacesApp& app)
{
    auto refs = report.outputs.find({kernel_ids::match, 0});
    auto dists = report.outputs.find({kernel_ids::match, 1});
    if (refs == report.outputs.end() || dists == report.outputs.end() || refs->second.size() != app.params.S ||
        dists->second.size() != app.params.S) {
        throw Error(ErrorCode::IllegalState, "the run did not produce a match for every sample");
    }
    std::vector<MatchResult> out;
    for (std::size_t s = 0; s < app.params.S; ++s) {
        const std::size_t ref = refs->second[s].as<std::uint32_t>();
        out.push_back({ref, app.referenceSubjects.at(ref), dists->second[s].as<double>()});
    }
    return out;
}

std::vector<MatchResult> sequentialOracle(const Dataset& dataset, std::optional<std::size_t> k)
{
    const auto in = stackImages(dataset, k);
    const auto& p = in.p;
    ImageMatrix training(p.M, p.N);
    std::copy_n(in.images.data.begin(), p.M * p.N, training.data.begin());
    const auto centered = meanSubtract(in.images, computeMean(training));
    const auto f = featuresFromCentered(centered, p);
    const auto subjects = referenceSubjectsOf(dataset);
    std::vector<MatchResult> out;
    for (const auto& w : f.samples) {
        auto m = classify(w, f.refs);
        m.subject = subjects[m.reference];
        out.push_back(m);
    }
    return out;
}

sysio::SystemConfig defaultEigenfacesConfig()
{
    sysio::SystemConfig cfg;
    cfg.cores.push_back({CoreId{0}, sysio::CoreKind::PROCESSOR, 4, 4, 0, 0, 0});
    cfg.cores.push_back({CoreId{1}, sysio::CoreKind::PROCESSOR, 4, 4, 0, 0, 0});
    cfg.cores.push_back({CoreId{2}, sysio::CoreKind::FABRIC_SLOT, 0, 0, 100, 4, 4});
    cfg.memory = {16384, 1048576};
    return cfg;
}

} // namespace redsharc::eigenfaces
