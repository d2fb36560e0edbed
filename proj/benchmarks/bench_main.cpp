#include <benchmark/benchmark.h>

#include <random>

#include "isacwave/channel.hpp"
#include "isacwave/config.hpp"
#include "isacwave/dataset.hpp"
#include "isacwave/learn.hpp"
#include "isacwave/pareto.hpp"
#include "isacwave/scenario.hpp"
#include "isacwave/waveform.hpp"

using namespace isacwave;

namespace {

CVec random_qpsk(std::size_t n, Rng& rng) {
    std::bernoulli_distribution bit(0.5);
    std::vector<std::uint8_t> bits(2 * n);
    for (auto& b : bits) {
        b = bit(rng) ? 1 : 0;
    }
    return qam_map(bits, 4);
}

void BM_Modulate(benchmark::State& state) {
    const auto id = static_cast<WaveformId>(state.range(0));
    const WaveformConfig cfg;
    Rng rng(1);
    const CVec sym = random_qpsk(symbols_per_frame(id, cfg), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(modulate(id, sym, cfg));
    }
    state.SetLabel(std::string(to_string(id)));
}
BENCHMARK(BM_Modulate)->DenseRange(0, 4);

void BM_Demodulate(benchmark::State& state) {
    const auto id = static_cast<WaveformId>(state.range(0));
    const WaveformConfig cfg;
    const Scenario sc = sample_scenario(ScenarioConfig{}, 7);
    const ChannelRealization real = to_realization(sc.users.front().channel, cfg.sample_rate_hz);
    Rng rng(2);
    const SignalFrame tx = modulate(id, random_qpsk(symbols_per_frame(id, cfg), rng), cfg);
    const SignalFrame rx = add_noise(apply_channel(tx, real, 0), 15.0, rng);
    const Receiver receiver(id, cfg, real, noise_variance_for(tx, 15.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(receiver.demodulate(rx, 0));
    }
    state.SetLabel(std::string(to_string(id)));
}
BENCHMARK(BM_Demodulate)->DenseRange(0, 4);

void BM_ParetoLabel(benchmark::State& state) {
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::array<ObjectiveVector, kNumWaveforms>> sets(1024);
    for (auto& s : sets) {
        for (auto& v : s) {
            for (auto& x : v) {
                x = u(rng);
            }
        }
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(label_objectives(sets[i++ % sets.size()], 0.02));
    }
}
BENCHMARK(BM_ParetoLabel);

void BM_LabelScenario(benchmark::State& state) {
    const Config cfg;
    std::uint64_t id = 0;
    for (auto _ : state) {
        const Scenario sc = sample_scenario(cfg.scenario, derive_seed(cfg.seed, id, Stream::Scenario), id);
        benchmark::DoNotOptimize(label_scenario(sc, cfg));
        ++id;
    }
}
BENCHMARK(BM_LabelScenario)->Unit(benchmark::kMillisecond)->Iterations(10);

void BM_PredictScores(benchmark::State& state) {
    const auto kind = static_cast<ModelKind>(state.range(0));
    Rng rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::Index n = 2000;
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kNumFeatures));
    Eigen::MatrixXd y(n, static_cast<Eigen::Index>(kNumWaveforms));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            x(r, c) = g(rng);
        }
        for (Eigen::Index c = 0; c < y.cols(); ++c) {
            y(r, c) = x(r, c % x.cols()) > 0.0 ? 1.0 : 0.0;
        }
    }
    LearnConfig learn;
    learn.mlp.max_epochs = 5;
    learn.forest.trees = 50;
    learn.boosting.rounds = 50;
    const TrainedModel model = fit(kind, x, y, x, y, learn, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_scores(model, x));
    }
    state.SetItemsProcessed(state.iterations() * n);
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_PredictScores)->DenseRange(0, 2);

} // namespace

BENCHMARK_MAIN();
