#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "altrec/error.hpp"
#include "altrec/pipeline.hpp"
#include "support/temp_dir.hpp"

using namespace altrec;
using namespace altrec::testing;

namespace {

PipelineConfig tiny(const std::filesystem::path& workspace) {
  PipelineConfig c;
  c.workspace = workspace;
  c.families = 2;
  c.products_per_family = 20;
  c.synth_sessions = 40;
  c.embed_dim = 6;
  c.hidden_dim = 4;
  c.max_epochs = 2;
  c.desc_len = 24;
  c.m = 4;
  c.ef_construction = 20;
  c.ef_search = 20;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ALTREC_CLI) + " --quiet " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("manifest records and verifies fingerprints") {
  TempDir dir;
  const auto file = dir.write("a.txt", "hello");
  Manifest m;
  m.record("output.a", file);
  m.set("note", "x=y");
  m.save(dir / "m.manifest");
  const auto loaded = Manifest::load(dir / "m.manifest");
  CHECK(loaded.get(dir / "m.manifest", "note") == "x=y");
  CHECK_NOTHROW(loaded.verify(dir / "m.manifest", "output.a", file));
  dir.write("a.txt", "changed");
  CHECK_THROWS_AS(loaded.verify(dir / "m.manifest", "output.a", file), StaleArtifactError);
  std::filesystem::remove(file);
  CHECK_THROWS_AS(loaded.verify(dir / "m.manifest", "output.a", file), MissingFileError);
  CHECK_THROWS_AS(Manifest::load(dir / "none.manifest"), MissingFileError);
  CHECK_THROWS_AS(loaded.get(dir / "m.manifest", "absent"), DataError);
}

TEST_CASE("stages chain and detect stale or missing inputs") {
  TempDir dir;
  const auto c = tiny(dir.path());
  CHECK_THROWS_AS(run_train(c), MissingFileError);
  run_synth(c);
  CHECK_THROWS_AS(run_embed(c), MissingFileError);
  run_sample(c);
  run_train(c);
  run_embed(c, true);
  CHECK(std::filesystem::exists(c.artifact("embeddings.txt")));
  run_index(c);
  std::ostringstream out;
  run_recommend(c, std::nullopt, out);
  CHECK(std::filesystem::exists(c.artifact("recommendations.csv")));
  run_evaluate(c);
  for (const auto* name : {"metrics_raw.csv", "metrics_filtered.csv", "coverage.csv", "metrics.txt", "history.csv"})
    CHECK(std::filesystem::exists(c.artifact(name)));

  SUBCASE("single anchor goes to the stream") {
    const auto recs = read_file(c.artifact("recommendations.csv"));
    const auto first = recs.substr(0, recs.find(','));
    std::ostringstream one;
    run_recommend(c, first, one);
    CHECK_FALSE(one.str().empty());
    CHECK_THROWS_AS(run_recommend(c, std::string("missing-id"), one), DataError);
  }
  SUBCASE("retrained model makes the embeddings stale") {
    auto d = c;
    d.seed = 8;
    run_train(d);
    CHECK_THROWS_AS(run_index(c), StaleArtifactError);
  }
  SUBCASE("edited catalog makes the sample stale") {
    std::ofstream(c.catalog_path(), std::ios::app) << R"({"product_id":"x1","title":"new thing","description":""})" << '\n';
    CHECK_THROWS_AS(run_train(c), StaleArtifactError);
    CHECK_THROWS_AS(run_embed(c), StaleArtifactError);
  }
  SUBCASE("tampered embeddings are detected downstream") {
    std::ofstream(c.artifact("embeddings.bin"), std::ios::app) << 'x';
    CHECK_THROWS_AS(run_index(c), StaleArtifactError);
    CHECK_THROWS_AS(run_recommend(c, std::nullopt, out), StaleArtifactError);
  }
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  const auto ws = " --workspace " + dir.path().string();
  CHECK(run_cli("--no-such-flag synth") == 2);
  CHECK(run_cli("--loss hinge train" + ws) == 2);
  CHECK(run_cli("train" + ws) == 3);
  CHECK(run_cli("--families 2 --products-per-family 12 --synth-sessions 10 synth" + ws) == 0);
  CHECK(run_cli("--catalog " + (dir / "absent.jsonl").string() + " sample" + ws) == 3);
  dir.write("run.conf", "embed-dim = 4\nhidden-dim = 3\nmax-epochs = 1\ndesc-len = 16\n");
  const auto conf = "--config " + (dir / "run.conf").string();
  CHECK(run_cli(conf + " sample" + ws) == 0);
  CHECK(run_cli(conf + " train" + ws) == 0);
  CHECK(run_cli("sample train" + ws) == 2);
  CHECK(std::filesystem::exists(dir / "model.ckpt"));
}
