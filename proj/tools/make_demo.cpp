// Writes a synthetic demo corpus (logs, references, demo.toml) for the
// pipeline: promptroute-demo data/demo && promptroute --config data/demo/demo.toml all
#include <iostream>

#include <CLI11.hpp>

#include "synth/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic demo corpus", "promptroute-demo"};
  std::string dir = "data/demo";
  promptroute::synth::CorpusSpec spec;
  app.add_option("dir", dir, "output directory");
  app.add_option("--per-language", spec.per_language, "instances per language");
  app.add_option("--backbones", spec.backbones, "backbone names")->delimiter(',');
  app.add_option("--noise", spec.noise, "outcome flip probability")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", spec.seed, "corpus seed");
  CLI11_PARSE(app, argc, argv);
  try {
    promptroute::synth::write_demo(dir, spec);
  } catch (const std::exception& e) {
    std::cerr << "promptroute-demo: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "wrote " << dir << "/demo.toml\n";
  return 0;
}
