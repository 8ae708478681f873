#include "toolsynth/config.hpp"
#include "toolsynth/demo_seeds.hpp"
#include "toolsynth/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Writes a procedural seed directory (background.png, <class>/<k>.png)"};
  std::string dir;
  std::uint64_t seed = 1;
  int per_class = 3;
  int background_size = 512;
  int sprite_size = 256;
  std::vector<std::string> classes = toolsynth::default_class_roster();
  app.add_option("dir", dir)->required();
  app.add_option("--seed", seed);
  app.add_option("--per-class", per_class)->check(CLI::Range(1, 3));
  app.add_option("--background-size", background_size)->check(CLI::PositiveNumber);
  app.add_option("--sprite-size", sprite_size)->check(CLI::PositiveNumber);
  app.add_option("--classes", classes);
  CLI11_PARSE(app, argc, argv);

  try {
    toolsynth::write_demo_seeds(dir, classes, per_class, seed, background_size, sprite_size);
  } catch (const toolsynth::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "wrote seeds for " << classes.size() << " classes to " << dir << '\n';
  return 0;
}
