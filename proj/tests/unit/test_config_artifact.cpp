#include <doctest.h>

#include <filesystem>

#include "rigcast/artifact.hpp"
#include "rigcast/config.hpp"
#include "rigcast/error.hpp"
#include "rigcast/eval.hpp"
#include "small_corpus.hpp"

using namespace rigcast;

TEST_CASE("config text round trip") {
  const PipelineConfig def;
  CHECK(parse_config(def.to_text()) == def);
  CHECK(parse_config("") == def);

  auto c = test::small_config();
  c.wavelet = {dwt::Family::Coif5, 1};
  c.threshold = 0.37;
  c.stage2_t_minutes = {72, 90.5};
  c.specs[index_of(Channel::GASA)].max_value = 2.5;
  CHECK(parse_config(c.to_text()) == c);
}

TEST_CASE("config parsing") {
  const auto c = parse_config("# comment\n\ncodebook.k = 50\nwavelet.family=db3\ntune.stage1.ks=10,20\n");
  CHECK(c.k == 50);
  CHECK(c.wavelet.family == dwt::Family::Db3);
  CHECK(c.stage1_ks == std::vector<std::size_t>{10, 20});
  CHECK_THROWS_AS(parse_config("codebook.kk=5\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("codebook.k=many\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("wavelet.family=haar\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigurationError);
}

TEST_CASE("artifact round trip") {
  const auto& corpus = test::small_corpus();
  const auto cfg = test::small_config();
  const ModelArtifact art{cfg, fit_pipeline(corpus.logs, corpus.accidents, cfg)};

  const auto bytes = serialize_artifact(art);
  CHECK(bytes.rfind(std::string("RIGCAST\0", 8), 0) == 0);
  const auto back = deserialize_artifact(bytes);
  CHECK(back == art);
  CHECK(serialize_artifact(back) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "rigcast_test.rca";
  save_artifact(art, path);
  const auto loaded = load_artifact(path);
  std::filesystem::remove(path);
  CHECK(loaded == art);
  const auto& log = corpus.logs[1];
  CHECK(stream_predict(loaded.model, log, minutes(10), 0.0) == stream_predict(art.model, log, minutes(10), 0.0));

  SUBCASE("a flipped byte fails the checksum") {
    auto bad = bytes;
    bad[bad.size() / 2] ^= 0x01;
    CHECK_THROWS_AS(deserialize_artifact(bad), CorruptArtifactError);
  }
  SUBCASE("truncation") {
    CHECK_THROWS_AS(deserialize_artifact(std::string_view(bytes).substr(0, bytes.size() - 9)), CorruptArtifactError);
    CHECK_THROWS_AS(deserialize_artifact(""), CorruptArtifactError);
  }
  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_artifact(bad), CorruptArtifactError);
  }
}
