// Library walk-through: simulate a small recording, preprocess it, cross-validate
// two grid cells and test the interval effect.
//
//   decode_synthetic [trials_per_class] [seed]

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "videc/videc.hpp"

using namespace videc;

int main(int argc, char **argv) {
  SynthConfig cfg;
  cfg.trials_per_class = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;
  cfg.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  try {
    const auto rec = generate_dataset(cfg);
    std::printf("recording: %zu channels, %zu samples at %g Hz, %zu events\n", rec.n_channels(), rec.n_samples(),
                rec.fs(), rec.events().size());

    const auto epochs = preprocess_recording(rec, PreprocessConfig{});
    std::printf("epochs: %zu trials x %zu channels x %zu samples at %g Hz\n", epochs.n_trials(),
                epochs.n_channels(), epochs.n_samples(), epochs.fs());

    const auto group = builtin_group("prefrontal9");
    CvConfig cv;
    cv.seed = cfg.seed;
    std::vector<CvResult> results;
    for (TimeWindow w : {TimeWindow{0.0, 1.0}, TimeWindow{1.0, 2.0}}) {
      PipelineConfig p;
      p.group = group.name;
      p.channels = group.channels;
      p.m = group.m;
      p.interval = w;
      results.push_back(cross_validate(epochs, p, cv));
      const auto t = tpr_stats(results.back().confusion);
      std::printf("%s %s: %s %%  (TPR gap %.1f)\n", group.name.c_str(), interval_header(w).c_str(),
                  format_cell(100 * results.back().mean_accuracy, 100 * results.back().std_accuracy).c_str(), t.gap);
    }

    BootstrapOptions opt;
    opt.seed = cfg.seed;
    const auto test = bootstrap_test(results[0].fold_accuracies, results[1].fold_accuracies, opt);
    std::printf("0 - 1 s vs 1 - 2 s: t = %.2f, p = %.4f%s\n", test.t_statistic, test.p_value,
                test.significant() ? " (significant)" : "");
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }
  return 0;
}
