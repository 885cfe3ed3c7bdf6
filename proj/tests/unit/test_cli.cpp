#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "mcse/audio_io.hpp"
#include "mcse/binary_dump.hpp"
#include "mcse/config.hpp"
#include "support.hpp"

using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mcse::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Short default scene written by the simulate command.
std::filesystem::path simulate(const testing::TempDir& dir, const std::string& name, int seed) {
  const auto out = dir / name;
  const Run r = run({"simulate", "--out", out.string(), "--seed", std::to_string(seed), "--duration", "1.5"});
  REQUIRE(r.code == 0);
  return out;
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"enhance", "--help"}).out.find("--dump-masks") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"enhance", "--input", "x.wav"}).code == 1);  // --out missing
  const Run none = run({"enhance", "--out", "x.wav"});
  CHECK(none.code == 1);
  CHECK(none.err.find("--input or --manifest") != std::string::npos);
  CHECK(run({"enhance", "--input", "a.wav", "--manifest", "m.json", "--out", "o"}).code == 1);
  CHECK(run({"calibrate"}).code == 1);
  const Run missing = run({"enhance", "--input", "/nonexistent/in.wav", "--out", "/tmp/never.wav"});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error: io:", 0) == 0);
}

TEST_CASE("config init") {
  testing::TempDir dir;
  const Run printed = run({"config", "init"});
  CHECK(printed.code == 0);
  CHECK_NOTHROW(mcse::config::to_enhancement_config(mcse::config::Document::parse(printed.out)));
  const auto path = (dir / "c.toml").string();
  CHECK(run({"config", "init", "--out", path}).code == 0);
  CHECK(slurp(path) == printed.out);
  CHECK(run({"config", "init", "--out", path}).code == 1);
  CHECK(run({"config", "init", "--out", path, "--force"}).code == 0);
}

TEST_CASE("simulate, enhance and evaluate") {
  testing::TempDir dir;
  const auto scene = simulate(dir, "scene", 4);
  for (const char* f : {"mixture.wav", "target.wav", "noise.wav", "scene.json"}) {
    CHECK(std::filesystem::exists(scene / f));
  }
  CHECK_FALSE(std::filesystem::exists(scene / "interferer.wav"));
  const Json spec = Json::parse(slurp(scene / "scene.json"));
  CHECK(spec["seed"] == 4);
  CHECK(spec["duration_s"] == 1.5);

  // scene.json reproduces the same mixture.
  const Run again = run({"simulate", "--scene", (scene / "scene.json").string(), "--out", (dir / "again").string()});
  REQUIRE(again.code == 0);
  CHECK(slurp(scene / "mixture.wav") == slurp(dir / "again" / "mixture.wav"));

  const auto enhanced = (dir / "enh" / "utt.wav").string();
  std::filesystem::create_directories(dir / "enh");
  const Run e = run({"enhance", "--input", (scene / "mixture.wav").string(), "--out", enhanced, "--dump-masks"});
  REQUIRE(e.code == 0);
  const Json diag = Json::parse(e.out);
  CHECK(diag["usable_channels"] == 6);
  CHECK(std::filesystem::exists(dir / "enh" / "utt.gain.mask"));
  CHECK(std::filesystem::exists(dir / "enh" / "utt.msc.mask"));
  CHECK(mcse::read_wave(enhanced).channels() == 1);

  const Run v = run({"evaluate", "--enhanced", enhanced, "--reference", (scene / "target.wav").string(), "--noisy",
                     (scene / "mixture.wav").string(), "--mask", (dir / "enh" / "utt.gain.mask").string()});
  REQUIRE(v.code == 0);
  const Json m = Json::parse(v.out);
  for (const char* k : {"si_sdr_db", "segmental_snr_db", "noisy_si_sdr_db", "noisy_segmental_snr_db",
                        "si_sdr_improvement_db"}) {
    CHECK(m[k].is_number());
  }
  CHECK(m["si_sdr_improvement_db"].get<double>() > 3.0);
  CHECK(m["mask_bands"].size() == 4);
}

TEST_CASE("calibrate and enhance with the calibration file") {
  testing::TempDir dir;
  const auto a = simulate(dir, "a", 1);
  const auto b = simulate(dir, "b", 2);
  const auto cal = (dir / "s1.bin").string();
  const Run off = run({"calibrate", "offline", "--input", (a / "mixture.wav").string(), "--input",
                       (b / "mixture.wav").string(), "--out", cal});
  REQUIRE(off.code == 0);
  CHECK(mcse::read_calibration(cal).stage == mcse::CalibrationStage::kOffline);
  const auto cal2 = (dir / "s2.bin").string();
  REQUIRE(run({"calibrate", "online", "--input", (a / "mixture.wav").string(), "--calib", cal, "--out", cal2}).code ==
          0);
  CHECK(mcse::read_calibration(cal2).stage == mcse::CalibrationStage::kOnline);

  const auto report = (dir / "diag.json").string();
  const Run e = run({"enhance", "--input", (a / "mixture.wav").string(), "--out", (dir / "o.wav").string(), "--calib",
                     cal, "--report", report});
  REQUIRE(e.code == 0);
  CHECK(e.out.empty());
  const Json diag = Json::parse(slurp(report));
  CHECK(diag["calibration"]["stage1_applied"] == true);
  CHECK(diag["calibration"]["online_applied"] == true);

  std::ofstream(dir / "bad.bin") << "xx";
  CHECK(run({"enhance", "--input", (a / "mixture.wav").string(), "--out", (dir / "p.wav").string(), "--calib",
             (dir / "bad.bin").string()})
            .code == 1);
}

TEST_CASE("batch exit codes") {
  testing::TempDir dir;
  const auto a = simulate(dir, "a", 1);
  std::ofstream(dir / "broken.wav") << "not audio";
  const Json good = Json::array({{{"id", "a"}, {"input", (a / "mixture.wav").string()}}});
  Json mixed = good;
  mixed.push_back({{"id", "broken"}, {"input", (dir / "broken.wav").string()}});
  std::ofstream(dir / "good.json") << good.dump();
  std::ofstream(dir / "mixed.json") << mixed.dump();
  std::ofstream(dir / "empty.json") << "[]";

  CHECK(run({"enhance", "--manifest", (dir / "empty.json").string(), "--out", (dir / "o0").string()}).code == 0);
  CHECK(run({"enhance", "--manifest", (dir / "good.json").string(), "--out", (dir / "o1").string()}).code == 0);
  CHECK(std::filesystem::exists(dir / "o1" / "a.enh.wav"));
  CHECK(run({"enhance", "--manifest", (dir / "mixed.json").string(), "--out", (dir / "o2").string()}).code == 2);
  CHECK(run({"enhance", "--manifest", (dir / "mixed.json").string(), "--out", (dir / "o3").string(), "--strict"})
            .code == 1);
  const Json rep = Json::parse(slurp(dir / "o2" / "report.json"));
  CHECK(rep["summary"]["failed"] == 1);
  CHECK(run({"enhance", "--manifest", (dir / "nope.json").string(), "--out", (dir / "o4").string()}).code == 1);
}
