#include <chrono>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "dreid/evaluation.hpp"
#include "dreid/io.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
namespace io = dreid::io;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult dreid_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = dreid::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string opt(const std::string& key, const fs::path& value) { return "--" + key + "=" + value.string(); }

json read_json(const fs::path& p) { return json::parse(io::read_text(p)); }

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") {}

  fs::path root() const { return dir_.path(); }

  // 3 persons x 4 frames, default synth settings.
  fs::path synth_bodies(const std::string& name, int persons = 3, int frames = 4, double max_yaw = 30.0) {
    const fs::path out = root() / name;
    const auto r = dreid_cli({"synth", opt("output", out), "--synth.persons=" + std::to_string(persons),
                              "--synth.frames=" + std::to_string(frames),
                              "--synth.max_yaw_deg=" + std::to_string(max_yaw)});
    EXPECT_EQ(r.code, 0) << r.err;
    return out / "manifest.json";
  }

  testing_support::TempDir dir_;
};

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

TEST_F(CliTest, SynthThenExtractWritesOneDescriptorPerFrame) {
  const fs::path manifest = synth_bodies("data");
  const json m = read_json(manifest);
  ASSERT_EQ(m["persons"].size(), 3u);
  EXPECT_EQ(m["persons"][0]["sequences"]["0"].size(), 4u);
  const auto r = dreid_cli({"extract", opt("manifest", manifest), opt("output", root() / "run")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_files(root() / "run" / "descriptors", ".json"), 12u);
  const json report = read_json(root() / "run" / "extract_errors.json");
  EXPECT_EQ(report["frames"], 12);
  EXPECT_TRUE(report["failed"].empty());
  const auto d = io::parse_descriptor(io::read_text(root() / "run" / "descriptors" / "p1_f2.json"));
  EXPECT_EQ(d.person, 1);
  EXPECT_EQ(d.ed.x.size(), 354);
}

TEST_F(CliTest, ExtractRerunRecomputesNothing) {
  const fs::path manifest = synth_bodies("data");
  const std::vector<std::string> args{"extract", opt("manifest", manifest), opt("output", root() / "run")};
  ASSERT_EQ(dreid_cli(args).code, 0);
  const fs::path probe = root() / "run" / "descriptors" / "p0_f0.json";
  const auto before = fs::last_write_time(probe);
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  const auto r = dreid_cli(args);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0 computed, 12 up to date"), std::string::npos) << r.out;
  EXPECT_EQ(fs::last_write_time(probe), before);

  // A changed grid invalidates the cached descriptors.
  const auto regrid = dreid_cli({"extract", opt("manifest", manifest), opt("output", root() / "run"),
                                 "--grid.rows=4"});
  ASSERT_EQ(regrid.code, 0);
  EXPECT_NE(regrid.out.find("12 computed"), std::string::npos) << regrid.out;

  // So do changed normal and regularization settings.
  for (const char* change : {"--k=12", "--eps_rel=1e-5"}) {
    const auto r2 = dreid_cli({"extract", opt("manifest", manifest), opt("output", root() / "run"), "--grid.rows=4",
                               change});
    ASSERT_EQ(r2.code, 0);
    EXPECT_NE(r2.out.find("12 computed"), std::string::npos) << change << ": " << r2.out;
  }
}

TEST_F(CliTest, CorruptedFrameIsReportedAndTheRunSucceeds) {
  const fs::path manifest = synth_bodies("data");
  const fs::path bad = root() / "data" / "frames" / "p2_f1.ply";
  io::write_text_atomic(bad, "ply\nformat ascii 1.0\nelement vertex 5\nproperty float x\nend_header\n1\n");
  const auto r = dreid_cli({"extract", opt("manifest", manifest), opt("output", root() / "run")});
  EXPECT_EQ(r.code, 0) << r.err;
  const json report = read_json(root() / "run" / "extract_errors.json");
  ASSERT_EQ(report["failed"].size(), 1u);
  EXPECT_EQ(report["failed"][0]["id"], "p2_f1");
  EXPECT_EQ(fs::path(report["failed"][0]["file"].get<std::string>()), bad);
  EXPECT_EQ(count_files(root() / "run" / "descriptors", ".json"), 11u);

  // Evaluation skips the failed frame with a warning rather than aborting.
  const auto ev = dreid_cli({"evaluate", opt("manifest", manifest), opt("output", root() / "run"), "--trials=2",
                             "--descriptor=skl"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const json summary = read_json(root() / "run" / "summary.json");
  EXPECT_EQ(summary["frames"], 11);
  EXPECT_NE(summary["warnings"].dump().find("p2_f1"), std::string::npos);
}

TEST_F(CliTest, MostFramesFailingIsADataError) {
  const fs::path manifest = synth_bodies("data", 2, 2);
  for (const char* id : {"p0_f0", "p0_f1", "p1_f0"}) {
    io::write_text_atomic(root() / "data" / "frames" / (std::string(id) + ".ply"), "garbage");
  }
  EXPECT_EQ(dreid_cli({"extract", opt("manifest", manifest), opt("output", root() / "run")}).code, 2);
}

TEST_F(CliTest, EvaluateWritesPerTrialCurvesAndIsByteReproducible) {
  const fs::path manifest = synth_bodies("data");
  const fs::path run = root() / "run";
  ASSERT_EQ(dreid_cli({"extract", opt("manifest", manifest), opt("output", run)}).code, 0);
  const std::vector<std::string> args{"evaluate", opt("manifest", manifest), opt("output", run), "--trials=10",
                                      "--seed=7", "--descriptor=dvcov+skl"};
  ASSERT_EQ(dreid_cli(args).code, 0);
  const std::string cmc = io::read_text(run / "cmc.csv");
  const std::string summary = io::read_text(run / "summary.json");
  const json s = json::parse(summary);
  EXPECT_EQ(s["trials"].size(), 10u);
  EXPECT_EQ(s["seed"], 7);
  EXPECT_EQ(s["config"]["descriptor"], "dvcov+skl");
  EXPECT_EQ(cmc.substr(0, 14), "rank,accuracy\n");

  ASSERT_EQ(dreid_cli(args).code, 0);
  EXPECT_EQ(io::read_text(run / "cmc.csv"), cmc);
  EXPECT_EQ(io::read_text(run / "summary.json"), summary);

  // Thread count does not change the results.
  auto single = args;
  single.push_back("--threads=1");
  ASSERT_EQ(dreid_cli(single).code, 0);
  EXPECT_EQ(io::read_text(run / "cmc.csv"), cmc);
}

TEST_F(CliTest, EchoedConfigReproducesResults) {
  const fs::path manifest = synth_bodies("data");
  const fs::path run = root() / "run";
  ASSERT_EQ(dreid_cli({"extract", opt("manifest", manifest), opt("output", run)}).code, 0);
  ASSERT_EQ(dreid_cli({"evaluate", opt("manifest", manifest), opt("output", run), "--trials=3", "--seed=11",
                       "--descriptor=skl", "--protocol=single_shot"})
                .code,
            0);
  const json echoed = read_json(run / "summary.json")["config"];
  io::write_text_atomic(root() / "echo.json", echoed.dump(2));
  const fs::path again = root() / "again";
  // The echoed config still points at the first run's descriptors.
  const auto r = dreid_cli({"evaluate", "-c", (root() / "echo.json").string(), opt("output", again),
                            opt("descriptors", run / "descriptors")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_text(again / "cmc.csv"), io::read_text(run / "cmc.csv"));
}

TEST_F(CliTest, EdSklSeparatesMildlyRotatedSyntheticIdentities) {
  const fs::path manifest = synth_bodies("data", 10, 6, 5.0);
  const fs::path run = root() / "run";
  ASSERT_EQ(dreid_cli({"extract", opt("manifest", manifest), opt("output", run)}).code, 0);
  ASSERT_EQ(dreid_cli({"evaluate", opt("manifest", manifest), opt("output", run), "--descriptor=ed+skl"}).code, 0);
  EXPECT_GE(read_json(run / "summary.json")["rank1"].get<double>(), 0.9);
}

TEST_F(CliTest, ManifestAcceptsNestedGroupsAndFlatLists) {
  synth_bodies("data", 2, 2);
  auto frame = [](const std::string& id) {
    return json{{"cloud", "frames/" + id + ".ply"}, {"skeleton", "frames/" + id + "_skeleton.json"}};
  };
  const json nested = {{"persons",
                        {{{"id", "alice"}, {"sequences", {{"0", {frame("p0_f0")}}, {"1", {frame("p0_f1")}}}}},
                         {{"id", "bob"}, {"sequences", {{"0", {frame("p1_f0")}}, {"1", {frame("p1_f1")}}}}}}}};
  io::write_text_atomic(root() / "data" / "groups.json", nested.dump());
  const auto r = dreid_cli({"extract", opt("manifest", root() / "data" / "groups.json"), opt("output", root() / "a")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto d = io::parse_descriptor(io::read_text(root() / "a" / "descriptors" / "bob_g1_0.json"));
  EXPECT_EQ(d.person, 1);
  EXPECT_EQ(d.group, 1);

  json flat = frame("p1_f1");
  flat["id"] = "x";
  flat["person"] = 4;
  flat["group"] = 2;
  io::write_text_atomic(root() / "data" / "flat.json", json{{"frames", {flat}}}.dump());
  ASSERT_EQ(dreid_cli({"extract", opt("manifest", root() / "data" / "flat.json"), opt("output", root() / "b")}).code,
            0);
  const auto x = io::parse_descriptor(io::read_text(root() / "b" / "descriptors" / "x.json"));
  EXPECT_EQ(x.person, 4);
  EXPECT_EQ(x.group, 2);

  json bad = nested;
  bad["persons"][0]["sequences"]["still"] = bad["persons"][0]["sequences"]["1"];
  io::write_text_atomic(root() / "data" / "bad.json", bad.dump());
  EXPECT_EQ(dreid_cli({"extract", opt("manifest", root() / "data" / "bad.json"), opt("output", root() / "c")}).code,
            2);
}

TEST_F(CliTest, MeanNormalizedFusionIsSelectable) {
  const fs::path manifest = synth_bodies("data");
  const fs::path run = root() / "run";
  ASSERT_EQ(dreid_cli({"extract", opt("manifest", manifest), opt("output", run)}).code, 0);
  const auto r = dreid_cli({"evaluate", opt("manifest", manifest), opt("output", run), "--trials=2",
                            "--descriptor=dvcov+skl", "--fusion_scaling=mean"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(run / "summary.json")["config"]["fusion_scaling"], "mean");
  EXPECT_EQ(dreid_cli({"evaluate", opt("manifest", manifest), opt("output", run), "--fusion_scaling=zscore"}).code,
            1);
}

TEST_F(CliTest, EvaluateWithoutDescriptorsNamesExtract) {
  const fs::path manifest = synth_bodies("data");
  const auto r = dreid_cli({"evaluate", opt("manifest", manifest), opt("output", root() / "run")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("dreid extract"), std::string::npos) << r.err;
}

class CliTransferTest : public CliTest {
 protected:
  // Corruption benchmark plus a model trained on its auxiliary set.
  void SetUp() override {
    data_ = root() / "bench";
    const auto s = dreid_cli({"synth", opt("output", data_), "--synth.kind=corruption", "--synth.persons=20", "--seed=3"});
    ASSERT_EQ(s.code, 0) << s.err;
    const auto t = dreid_cli({"transfer-train", opt("transfer.aux_manifest", data_ / "aux_manifest.json"),
                              opt("output", root() / "model"), "--transfer.m=38"});
    ASSERT_EQ(t.code, 0) << t.err;
  }

  RunResult apply(const fs::path& out, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{"transfer-apply", opt("transfer.model", root() / "model" / "transfer_model.json"),
                                  opt("transfer.target_manifest", data_ / "target_manifest.json"),
                                  opt("output", out)};
    args.insert(args.end(), extra.begin(), extra.end());
    return dreid_cli(args);
  }

  fs::path data_;
};

TEST_F(CliTransferTest, ModelCarriesDiagnostics) {
  const json model = read_json(root() / "model" / "transfer_model.json");
  EXPECT_EQ(model["projection"][0].size(), 38u);
  EXPECT_EQ(model["projection"].size(), 160u);
  EXPECT_LE(model["diagnostics"]["max_residual"].get<double>(), 1e-6);
  EXPECT_EQ(model["diagnostics"]["nontrivial_columns"], 38);
  EXPECT_LE(model["diagnostics"]["orthonormality_error"].get<double>(), 1e-8);
  EXPECT_EQ(model["diagnostics"]["eigenvalues"].size(), 38u);
}

TEST_F(CliTransferTest, RetrainingIsByteIdentical) {
  const std::string first = io::read_text(root() / "model" / "transfer_model.json");
  ASSERT_EQ(dreid_cli({"transfer-train", opt("transfer.aux_manifest", data_ / "aux_manifest.json"),
                       opt("output", root() / "model"), "--transfer.m=38"})
                .code,
            0);
  EXPECT_EQ(io::read_text(root() / "model" / "transfer_model.json"), first);
}

TEST_F(CliTransferTest, SweepEmitsFourCurvesAndEtaZeroIsRgbOnly) {
  const fs::path out = root() / "apply";
  const auto r = apply(out, {"--transfer.eta=0"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* tag : {"0.00", "0.15", "0.30", "1.00"}) {
    EXPECT_TRUE(fs::exists(out / ("cmc_eta_" + std::string(tag) + ".csv"))) << tag;
  }
  EXPECT_EQ(read_json(out / "transfer_summary.json")["sweep"].size(), 4u);

  const auto rgb = io::parse_distance_matrix(io::read_text(data_ / "target_rgb_distances.csv"));
  std::vector<int> labels;
  for (const auto& id : rgb.gallery_ids) labels.push_back(std::stoi(id.substr(2)));
  std::vector<int> probes;
  for (const auto& id : rgb.probe_ids) probes.push_back(std::stoi(id.substr(2)));
  const std::string rgb_cmc = io::format_cmc(dreid::cmc_evaluate(rgb.probe_by_gallery, labels, probes));
  EXPECT_EQ(io::read_text(out / "cmc.csv"), rgb_cmc);
  EXPECT_EQ(io::read_text(out / "cmc_eta_0.00.csv"), rgb_cmc);
}

TEST_F(CliTransferTest, ShapeMismatchIsADataError) {
  const auto rgb = io::parse_distance_matrix(io::read_text(data_ / "target_rgb_distances.csv"));
  io::DistanceMatrixFile cut = rgb;
  cut.gallery_ids.pop_back();
  cut.probe_by_gallery = rgb.probe_by_gallery.leftCols(rgb.probe_by_gallery.cols() - 1);
  io::write_text_atomic(data_ / "target_rgb_distances.csv", io::format_distance_matrix(cut));
  const auto r = apply(root() / "apply");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gallery"), std::string::npos) << r.err;
}

TEST(CliExitCodes, UsageDataAndNumerical) {
  testing_support::TempDir dir("cli");
  EXPECT_EQ(dreid_cli({}).code, 1);
  EXPECT_EQ(dreid_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(dreid_cli({"evaluate", "--no_such_key=1"}).code, 1);
  EXPECT_EQ(dreid_cli({"evaluate", "--descriptor=rgb"}).code, 1);
  EXPECT_EQ(dreid_cli({"evaluate", "--transfer.eta=2"}).code, 1);
  EXPECT_EQ(dreid_cli({"evaluate"}).code, 1);  // no manifest configured
  EXPECT_EQ(dreid_cli({"evaluate", opt("manifest", dir.path() / "missing.json")}).code, 2);

  const fs::path aux = dir.path() / "aux";
  ASSERT_EQ(dreid_cli({"synth", opt("output", aux), "--synth.kind=paired", "--synth.persons=3",
                       "--synth.views=2"})
                .code,
            0);
  const auto r = dreid_cli({"transfer-train", opt("transfer.aux_manifest", aux / "aux_manifest.json"),
                            opt("output", dir.path()), "--transfer.beta=0", "--transfer.gamma0=0",
                            "--transfer.gamma0p=0", "--transfer.gamma1=0", "--transfer.gamma1p=0"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(CliConfig, PrintConfigAppliesOverridesAndFiles) {
  testing_support::TempDir dir("cli");
  io::write_text_atomic(dir.path() / "c.json", R"({"trials": 4, "transfer": {"eta": 0.5}})");
  const auto r = dreid_cli({"--print-config", "-c", (dir.path() / "c.json").string(), "-s", "grid.rows=3",
                            "evaluate", "--seed=9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json c = json::parse(r.out);
  EXPECT_EQ(c["trials"], 4);
  EXPECT_EQ(c["transfer"]["eta"], 0.5);
  EXPECT_EQ(c["transfer"]["m"], 700);
  EXPECT_EQ(c["grid"]["rows"], 3);
  EXPECT_EQ(c["seed"], 9);

  io::write_text_atomic(dir.path() / "bad.json", R"({"trails": 4})");
  EXPECT_EQ(dreid_cli({"-c", (dir.path() / "bad.json").string(), "evaluate"}).code, 1);
}

TEST(CliVerify, PropertySuitePasses) {
  const auto r = dreid_cli({"verify", "--verify.pairs=100", "--verify.motions=20"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("verify: ok"), std::string::npos);
}

}  // namespace
