#include "episim/address_map.hpp"
#include "episim/kernels.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <utility>
#include <vector>

// Regenerates the sources under kernels/ from the generator functions.
int main(int argc, char** argv) {
  using namespace epi;
  const std::filesystem::path dir = argc > 1 ? argv[1] : "kernels";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<const char*, std::string>> files = {
      {"fmadd_stream.s", kernels::fmadd_stream(256)},
      {"branch_loop.s", kernels::branch_loop(64, true)},
      {"wand_barrier.s", kernels::wand_barrier(10, 100)},
      {"testset_mutex.s", kernels::testset_mutex(0x80804000, 1000)},
      {"ping.s", kernels::ping(encode_address({32, 9}, kernels::kData), 32, true)},
      {"pong.s", kernels::ping(encode_address({32, 8}, kernels::kData), 32, false)},
  };
  for (const auto& [name, text] : files) {
    std::ofstream out(dir / name);
    out << text;
    if (!out) {
      std::cerr << "cannot write " << (dir / name).string() << "\n";
      return 1;
    }
  }
  return 0;
}
