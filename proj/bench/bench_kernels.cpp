// Times the OpenMP-parallel kernels against single-threaded runs of the same
// code. The kernels use fixed-order reductions, so the outputs are identical
// at any thread count; this binary is about speed only.
//
//   ./earlyguard_bench [threads]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "earlyguard/baselines.hpp"
#include "earlyguard/evaluation.hpp"
#include "earlyguard/gru.hpp"
#include "earlyguard/normalizer.hpp"
#include "earlyguard/search.hpp"
#include "earlyguard/synth.hpp"
#include "earlyguard/training.hpp"

using namespace earlyguard;

namespace {

double time_once(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, const std::function<void()>& fn, int threads) {
    omp_set_num_threads(1);
    const double serial = time_once(fn);
    omp_set_num_threads(threads);
    const double parallel = time_once(fn);
    std::printf("%-28s serial %8.3fs   %2d threads %8.3fs   speedup %.2fx\n", name, serial, threads,
                parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
    std::printf("comparing 1 thread vs %d threads\n\n", threads);

    const LabeledDataset data = synth_generate(GeneratorSpec{}, 150, 150, 7);
    const Normalizer norm = fit_normalizer(data);

    // Batch gradient: the training hot loop.
    {
        HyperConfig cfg;
        cfg.depth = 2;
        cfg.bidirectional = true;
        cfg.hidden_neurons = 48;
        cfg.train_time_seconds = 8;
        const GruNetwork net = init_params(cfg, 11);
        std::vector<StdSequence> seqs;
        std::vector<int> labels;
        for (const auto& tr : data.traces) {
            seqs.push_back(apply_normalizer_prefix(norm, tr, cfg.train_time_seconds));
            labels.push_back(tr.label == Label::malicious ? 1 : 0);
        }
        report("batch_gradient x20", [&] {
            for (int rep = 0; rep < 20; ++rep) batch_gradient(net, seqs, labels, 99);
        }, threads);
    }

    // Random search: independent trials.
    {
        SearchSpace space;
        space.hidden_min = 4;
        space.hidden_max = 12;
        space.epochs_min = 2;
        space.epochs_max = 4;
        space.train_time_min = 2;
        space.train_time_max = 6;
        report("random_search 8 trials", [&] { random_search(space, data, 8, 5, 21); }, threads);
    }

    // Random forest: per-tree training.
    {
        const FlatDataset flat = flatten_dataset(data, norm, 6);
        ForestParams fp;
        fp.seed = 5;
        report("forest_train 200 trees", [&] {
            ForestParams p = fp;
            p.trees = 200;
            forest_train(flat, p);
        }, threads);
    }

    // Ablation sweep: independent masked evaluations.
    {
        HyperConfig cfg;
        cfg.depth = 1;
        cfg.hidden_neurons = 32;
        cfg.epochs = 4;
        cfg.train_time_seconds = 6;
        GruNetwork net = init_params(cfg, 3);
        train(net, data, norm, 13);
        report("impact_factors k=2", [&] { impact_factors(net, data, 6, 2); }, threads);
    }

    return 0;
}
