#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "entroflow/config.hpp"
#include "entroflow/error.hpp"

namespace fs = std::filesystem;
using namespace entroflow;

namespace {

// 0 ok, 1 module failure, 2 usage
int run_one(const fs::path& config, const RunOptions& opt, std::ostream& log) {
  try {
    const auto cfg = Config::load(config);
    const auto sum = run_experiment(cfg, opt);
    log << config.string() << ": " << sum.headline << "\n";
    return 0;
  } catch (const Error& e) {
    log << config.string() << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    log << config.string() << ": " << e.what() << "\n";
    return 1;
  }
}

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ENTROFLOW_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy and lambda functionals along rotationally symmetric Ricci flow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ENTROFLOW_VERSION);

  fs::path config, out;
  std::uint64_t seed = 0;
  long every = 0;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config, "config file")->required();
  run->add_option("--out", out, "output directory (default: the config's out key)");
  run->add_option("--seed", seed, "seed for the Sobolev trial set");
  run->add_option("--checkpoint-every", every, "flow steps between snapshots");

  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("--config", config, "config file")->required();

  std::vector<fs::path> configs;
  auto* batch = app.add_subcommand("batch", "run several configs concurrently");
  batch->add_option("--config", configs, "config files")->required();
  batch->add_option("--out", out, "parent directory; each run gets <out>/<config stem>")
      ->required();
  batch->add_option("--seed", seed, "seed for the Sobolev trial set");
  batch->add_option("--checkpoint-every", every, "flow steps between snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunOptions opt;
  if (seed != 0 || run->count("--seed") || batch->count("--seed")) opt.seed = seed;
  if (every != 0) opt.checkpoint_every = every;

  if (*run) {
    opt.out = out;
    return run_one(config, opt, std::cout);
  }

  if (*val) {
    try {
      const auto rep = validate_config(Config::load(config));
      for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
      for (const auto& e : rep.errors) std::cout << "error: " << e << "\n";
      if (!rep.ok()) return 2;
      std::cout << "ok, estimated steps " << rep.estimated_steps << ", work "
                << rep.estimated_work << "\n";
      return 0;
    } catch (const Error& e) {
      std::cout << "error: " << e.what() << "\n";
      return 2;
    }
  }

  // batch
  std::atomic<std::size_t> next{0};
  std::vector<int> codes(configs.size(), 0);
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) {
      RunOptions o = opt;
      o.out = out / configs[i].stem();
      std::ostringstream log;
      codes[i] = run_one(configs[i], o, log);
      std::lock_guard lock(io);
      std::cout << log.str();
    }
  };
  const unsigned nthreads = std::min<unsigned>(thread_cap(), configs.size());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}
