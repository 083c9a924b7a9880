// End-to-end checks of the command-line tool: file contracts, defaults in
// the manifest, exit codes. Needs --cli <path to the binary>.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sublift/imageio.hpp"
#include "sublift/problems.hpp"

using namespace sublift;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const char* what) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what);
  if (!ok) ++g_failures;
}

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--cli") == 0) cli = argv[i + 1];
  if (cli.empty()) {
    std::fprintf(stderr, "usage: cli_checks --cli <binary>\n");
    return 1;
  }
  const fs::path work = fs::temp_directory_path() / "sublift_cli_checks";
  fs::remove_all(work);
  fs::create_directories(work);

  {  // exit code 2 on config errors
    check(run(cli + " rof") != 0, "rof without input fails");
    check(WEXITSTATUS(run(cli + " rof --synthetic squares --labels 1")) == 2,
          "invalid label count exits 2");
    check(WEXITSTATUS(run(cli + " stereo-file --in missing.pgm --in2 missing.pgm --out " +
                          (work / "x").string())) == 2,
          "missing input exits 2");
  }

  {  // stereo-file on identical inputs: near-constant depth, L=5 default,
     // width-many profile rows per step
    PixelGrid g{24, 18, 1.0};
    SyntheticScene empty;
    empty.background = 0.0;
    StereoPair pair = make_stereo_pair(empty, g, 0, 5);
    const fs::path in1 = work / "left.pgm", in2 = work / "right.pgm";
    write_pgm(pair.I1, in1.string());
    write_pgm(pair.I2, in2.string());
    const fs::path out = work / "sf";
    const int rc = run(cli + " stereo-file --in " + in1.string() + " --in2 " + in2.string() +
                       " -K 3 --max-iters 2000 --out " + out.string());
    check(rc == 0, "stereo-file on identical inputs succeeds");
    const std::string manifest = slurp(out / "manifest.txt");
    check(manifest.find("labels=5") != std::string::npos, "manifest records the L=5 default");
    auto depth = read_pgm((out / "depth_k003.pgm").string());
    double lo = 1e300, hi = -1e300;
    for (double x : depth.v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    check(hi - lo <= 0.02, "depth map is near-constant");
    const std::string prof = slurp(out / "profile.csv");
    const size_t rows = size_t(std::count(prof.begin(), prof.end(), '\n'));
    check(rows == 1 + 3 * 24, "profile has width-many rows per step");
  }

  {  // stereo-toy with zero shift: flat depth at the bottom label
    const fs::path out = work / "toy0";
    const int rc = run(cli + " stereo-toy --size 24 --shift 0 -K 2 --max-iters 2000 --out " +
                       out.string());
    check(rc == 0, "stereo-toy with zero shift succeeds");
    for (int k = 1; k <= 2; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "depth_k%03d.pgm", k);
      auto depth = read_pgm((out / name).string());
      double hi = 0.0;
      for (double x : depth.v) hi = std::max(hi, x);
      check(hi <= 0.02, "depth stays at the bottom label");
    }
    check(fs::exists(out / "scale_order.csv"), "scale_order.csv written");
  }

  {  // rof with -K 1 writes exactly one image per mode
    const fs::path out = work / "rof1";
    const int rc = run(cli + " rof --synthetic squares --size 12 --subsamples 16 -K 1 --out " +
                       out.string() + " --modes lifted_transform");
    check(rc == 0, "rof -K 1 succeeds");
    check(fs::exists(out / "lifted_transform_k001.pgm") &&
              !fs::exists(out / "lifted_transform_k002.pgm"),
          "one image per step");
  }

  return g_failures;
}
