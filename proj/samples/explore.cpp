// Builds a small space from a clique file and walks through the homonym
// workflow: plain neighbors, then neighbors with one sense subtracted.
//
//   sample_explore [cliques-file] [term] [sense-to-remove]

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rvsem/rvsem.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : RVSEM_SAMPLE_DIR "/bank.cliques";
  const std::string term = argc > 2 ? argv[2] : "bank";
  const std::string sense = argc > 3 ? argv[3] : "river";

  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << '\n';
    return 1;
  }
  try {
    const auto space = rvsem::build_space(rvsem::parse_cliques(in), rvsem::SpaceConfig{2500, 50, 7});
    std::cout << term << ":\n";
    rvsem::write_neighbors(std::cout, rvsem::neighbors(space, term, 12), rvsem::OutputFormat::table);

    const std::vector<std::string> minus{sense};
    std::cout << '\n' << term << " - " << sense << ":\n";
    rvsem::write_neighbors(std::cout, rvsem::neighbors(space, term, 12, minus), rvsem::OutputFormat::table);

    std::cout << "\nclusters of " << term << ":\n";
    rvsem::write_clusters(std::cout, rvsem::clusters(space, term, {}, {0.9, 6}), rvsem::OutputFormat::table);
  } catch (const rvsem::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
