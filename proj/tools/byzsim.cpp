// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

// byzsim run    --config FILE [--seed S]... [--gammas a,b,c]
// byzsim sweep  --config FILE --seeds 1,2,3 [--gammas a,b,c | --gamma-grid]
// byzsim verify
//
// Exit status: 0 success, 1 failed checks or internal error, 2 bad
// configuration or usage, 3 unreadable or unwritable files.

#include <zlib.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "byzsim/byzsim.hpp"
#include "byzsim/verify.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw byzsim::IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw byzsim::IoError("read of " + path + " failed");
  return buf.str();
}

std::string read_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw byzsim::IoError("cannot open " + path);
  std::string out;
  char chunk[1 << 16];
  int got = 0;
  while ((got = gzread(f, chunk, sizeof chunk)) > 0) out.append(chunk, static_cast<std::size_t>(got));
  int err = Z_OK;
  const std::string msg = got < 0 ? gzerror(f, &err) : "";
  gzclose(f);
  if (got < 0) throw byzsim::IoError("decompressing " + path + ": " + msg);
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

byzsim::Dataset load_data(const byzsim::DataSource& src) {
  if (src.synthetic) return byzsim::synthetic_dataset(src);
  const bool gz = src.gzip.value_or(ends_with(src.path, ".gz"));
  std::istringstream in(gz ? read_gzip(src.path) : read_text(src.path));
  const std::size_t d = src.dim ? src.dim : byzsim::infer_libsvm_dim(in);
  return byzsim::parse_libsvm(in, d);
}

std::vector<double> parse_gammas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(byzsim::detail::cfg_double("gammas", item));
  return out;
}

int experiment(const std::string& config_path, std::vector<std::uint64_t> seeds,
               const std::vector<double>& gammas) {
  byzsim::ExperimentSettings settings = byzsim::parse_config(read_text(config_path));
  if (seeds.empty()) seeds = settings.seeds;
  settings.run.threads = byzsim::threads_from_env();
  const byzsim::Dataset data = load_data(settings.data);
  std::cerr << "dataset: m=" << data.size() << " d=" << data.dim() << '\n';
  byzsim::run_sweep(settings, data, seeds, gammas, seeds.size() > 1, &std::cout);
  return 0;
}

int verify() {
  bool ok = true;
  for (const auto& r : byzsim::verify::run_suite()) {
    byzsim::verify::print_result(std::cout, r);
    ok = ok && r.pass;
  }
  return ok ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust compressed distributed training simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::uint64_t> run_seeds;
  std::string gammas_text;
  auto* run = app.add_subcommand("run", "run one configuration (once per --seed)");
  run->add_option("--config", config_path, "experiment file")->required();
  run->add_option("--seed", run_seeds, "override the configured seed(s)");
  run->add_option("--gammas", gammas_text, "comma-separated step sizes to fan out over");

  std::string seeds_text;
  bool gamma_grid = false;
  auto* sweep = app.add_subcommand("sweep", "run a configuration over several seeds");
  sweep->add_option("--config", config_path, "experiment file")->required();
  sweep->add_option("--seeds", seeds_text, "comma-separated seeds")->required();
  auto* g_opt = sweep->add_option("--gammas", gammas_text, "comma-separated step sizes");
  sweep->add_flag("--gamma-grid", gamma_grid, "fan out over gamma in {0.5, 0.05, 0.005}")
      ->excludes(g_opt);

  app.add_subcommand("verify", "run the numerical self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      return experiment(config_path, run_seeds,
                        gammas_text.empty() ? std::vector<double>{} : parse_gammas(gammas_text));
    }
    if (sweep->parsed()) {
      std::vector<double> gammas;
      if (gamma_grid) gammas = {0.5, 0.05, 0.005};
      if (!gammas_text.empty()) gammas = parse_gammas(gammas_text);
      return experiment(config_path, byzsim::detail::cfg_uint_list("seeds", seeds_text), gammas);
    }
    return verify();
  } catch (const byzsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const byzsim::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const byzsim::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const byzsim::RangeError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
