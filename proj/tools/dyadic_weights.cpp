// Command-line front end: experiment runner, single-constant queries, and
// Calderon-Zygmund decomposition dumps for grid files.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dw/constants.hpp"
#include "dw/czsparse.hpp"
#include "dw/grid.hpp"
#include "dw/io.hpp"
#include "dw/verify.hpp"

namespace {

int exit_code = 0;

dw::FamilyChoice parse_family(const std::string& s) {
  if (s == "dyadic") return dw::FamilyChoice::DyadicOnly;
  if (s == "full") return dw::FamilyChoice::FullOnly;
  if (s == "both") return dw::FamilyChoice::Both;
  return dw::FamilyChoice::Auto;
}

void print_value(const char* label, const dw::FamilyValue& fv) {
  if (!fv.computed) return;
  std::printf("%s = %.17g  (argmax %s)\n", label, fv.value, fv.argmax.str().c_str());
}

void print_report(const dw::ConstantReport& r) {
  print_value((r.name + " [dyadic]").c_str(), r.dyadic);
  print_value((r.name + " [full]").c_str(), r.full);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic weighted-BMO toolkit"};
  app.require_subcommand(1);

  // ---- run -----------------------------------------------------------
  auto* run = app.add_subcommand("run", "execute the experiment suites from a JSON config");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool progress = false;
  std::string run_family;
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "report output directory")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--jobs", jobs, "worker count (accepted for interface parity; execution is serial)");
  run->add_option("--family", run_family, "cube family override")
      ->check(CLI::IsMember({"dyadic", "full"}));
  run->add_flag("--progress", progress, "print per-weight timing to stderr");
  run->callback([&] {
    std::optional<dw::FamilyChoice> fam;
    if (!run_family.empty()) fam = parse_family(run_family);
    dw::RunResult res = dw::run_experiments(config_path, out_dir, seed, fam, progress);
    for (const auto& msg : res.failures) std::fprintf(stderr, "error: %s\n", msg.c_str());
    if (res.exit_code == 0)
      std::printf("ok: reports written to %s\n", out_dir.c_str());
    else
      std::fprintf(stderr, "failed: exit %d with %d hard failure(s)\n", res.exit_code,
                   res.hard_failures);
    exit_code = res.exit_code;
  });

  // ---- constant ------------------------------------------------------
  auto* con = app.add_subcommand("constant", "print one weight constant for a grid file");
  std::string grid_path, kind, con_family = "auto";
  double p = 2.0;
  con->add_option("grid", grid_path, "grid file (see save_grid format)")->required();
  con->add_option("--kind", kind, "which constant")
      ->required()
      ->check(CLI::IsMember({"ainfty", "a1", "ap", "weak", "cp"}));
  con->add_option("--p", p, "exponent for --kind ap or cp (default 2)");
  con->add_option("--family", con_family, "cube family")
      ->check(CLI::IsMember({"auto", "dyadic", "full", "both"}));
  con->callback([&] {
    try {
      auto w = std::make_shared<dw::GridFunction>(dw::load_grid(grid_path));
      dw::FamilyChoice fc = parse_family(con_family);
      if (kind == "ainfty") {
        print_report(dw::fujii_wilson(w, fc));
      } else if (kind == "weak") {
        print_report(dw::weak_ainfty(w, fc));
      } else if (kind == "cp") {
        print_report(dw::cp_constant(w, p, fc));
      } else if (kind == "a1") {
        dw::A1Report r = dw::a1_constant(*w);
        if (r.infinite)
          std::printf("a1 = inf  (weight vanishes at cell %lld)\n",
                      static_cast<long long>(r.arg_cell));
        else
          std::printf("a1 = %.17g  (argmax cell %lld)\n", r.value,
                      static_cast<long long>(r.arg_cell));
      } else {  // ap
        dw::ApResult r = dw::ap_constant(w, p, fc);
        if (r.infinite) {
          std::printf("ap(p=%g) = inf  (dual weight undefined at %s)\n", p,
                      r.report.canonical_argmax().str().c_str());
        } else {
          print_report(r.report);
        }
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      exit_code = 2;
    }
  });

  // ---- czdump --------------------------------------------------------
  auto* cz = app.add_subcommand("czdump", "print the Calderon-Zygmund decomposition at a level");
  std::string cz_path;
  double level = 2.0;
  cz->add_option("grid", cz_path, "grid file")->required();
  cz->add_option("--level", level, "stopping level L")->required();
  cz->callback([&] {
    try {
      dw::GridFunction f = dw::load_grid(cz_path);
      dw::CZDecomposition dec = dw::cz_decompose(f, dw::unit_cube(f.spec()), level);
      dw::CZInvariants inv = dw::check_cz_invariants(f, dec);
      nlohmann::ordered_json j;
      j["level"] = dec.level;
      j["base_mean"] = dec.base_mean;
      j["dev_mean"] = dec.dev_mean;
      j["stopping_count"] = dec.stopping.size();
      j["omega_cell_fraction"] = dec.omega_cell_fraction();
      j["upper_violations"] = dec.upper_violations;
      nlohmann::ordered_json cubes = nlohmann::ordered_json::array();
      for (const auto& q : dec.stopping) {
        nlohmann::ordered_json c;
        c["o"] = q.d == 2 ? nlohmann::ordered_json::array({q.o[0], q.o[1]})
                          : nlohmann::ordered_json::array({q.o[0]});
        c["s"] = q.s;
        c["mean"] = dw::average(f, q);
        cubes.push_back(std::move(c));
      }
      j["stopping"] = std::move(cubes);
      j["invariants"]["selection_ok"] = inv.selection_ok;
      j["invariants"]["upper_ok"] = inv.upper_ok;
      j["invariants"]["smallness_ok"] = inv.smallness_ok;
      j["invariants"]["reconstruction_error"] = inv.reconstruction_error;
      j["invariants"]["bad_mean_error"] = inv.bad_mean_error;
      j["invariants"]["bad_support_ok"] = inv.bad_support_ok;
      std::printf("%s\n", j.dump(2).c_str());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      exit_code = 2;
    }
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
