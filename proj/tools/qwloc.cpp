#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qwloc/io.hpp"
#include "qwloc/runner.hpp"

namespace {

struct SubArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qwloc: random coined quantum walk laboratory"};
  app.require_subcommand(1);

  std::vector<std::pair<std::string, SubArgs>> subs;
  subs.reserve(qwloc::subcommand_names().size());
  for (const auto& name : qwloc::subcommand_names()) {
    subs.emplace_back(name, SubArgs{});
    auto& args = subs.back().second;
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "JSON config file")->required();
    sub->add_option("--out", args.out_dir, "output directory (default ./qwloc-out/<subcommand>)");
    std::uint64_t* slot = nullptr;
    (void)slot;
    sub->add_option_function<std::uint64_t>(
        "--seed", [&args](const std::uint64_t& s) { args.seed = s; },
        "override the config seed");
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& [name, args] : subs) {
    if (!app.got_subcommand(name)) continue;
    try {
      const qwloc::Json conf = qwloc::Json::parse(qwloc::read_text_file(args.config_path));
      const std::string out =
          args.out_dir.empty() ? ("qwloc-out/" + name) : args.out_dir;
      qwloc::run_subcommand(name, conf, out, args.seed);
      return 0;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  std::cerr << "no subcommand selected\n";
  return 1;
}
