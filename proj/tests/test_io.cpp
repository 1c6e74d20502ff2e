#include <doctest.h>

#include <sstream>

#include "msbop/error.hpp"
#include "msbop/matrix_io.hpp"
#include "msbop/text.hpp"
#include "pipeline_config.hpp"
#include "support.hpp"

using namespace msbop;

TEST_CASE("number formatting and parsing") {
  CHECK(format_real(1.0 / 3.0) == "0.333333333");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(123456789012.0) == "1.23456789e+11");
  CHECK(format_real(2.0) == "2");
  CHECK(parse_real("1.5e-3") == std::optional<double>(1.5e-3));
  CHECK_FALSE(parse_real("1.5x").has_value());
  CHECK_FALSE(parse_real("").has_value());
  CHECK(parse_integer("-12") == std::optional<long long>(-12));
  CHECK_FALSE(parse_integer("3.0").has_value());
  CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(trim("  x \t") == "x");
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

TEST_CASE("matrix text blocks") {
  Eigen::MatrixXd a(2, 3);
  a << 1, 2.5, 1.0 / 7.0,  //
      0, -3, 1e-20;
  Metadata meta;
  meta.set("kind", "demo");
  meta.set("kind", "demo2");  // overwrite keeps position
  meta.set("k", "3");
  std::stringstream s;
  write_metadata(s, meta);
  write_matrix_block(s, {a, {"x", "y", "z"}});
  write_matrix_block(s, {Eigen::MatrixXd::Ones(1, 0), {}});
  CHECK(s.str() == "# kind=demo2\n# k=3\nrows=2 cols=3\nx y z\n1 2.5 0.142857143\n0 -3 1e-20\nrows=1 cols=0\n\n\n");

  MatrixReader reader(s);
  const auto first = reader.next_block();
  REQUIRE(first.has_value());
  CHECK(first->column_ids == std::vector<std::string>{"x", "y", "z"});
  CHECK(std::abs(first->values(0, 2) - 1.0 / 7.0) <= 1e-9);
  const auto second = reader.next_block();
  REQUIRE(second.has_value());
  CHECK(second->values.rows() == 1);
  CHECK(second->values.cols() == 0);
  CHECK_FALSE(reader.next_block().has_value());
  CHECK(reader.metadata().require("k") == "3");
  CHECK_THROWS_AS(reader.metadata().require("missing"), DataError);

  std::stringstream bad("rows=2 cols=2\na b\n1 2\n3 x\n");
  MatrixReader r2(bad);
  CHECK_THROWS_AS(r2.next_block(), DataError);
  std::stringstream ids("rows=1 cols=2\na\n1 2\n");
  MatrixReader r3(ids);
  CHECK_THROWS_AS(r3.next_block(), DataError);
}

TEST_CASE("config loading") {
  using namespace msbop::cli;
  testing::TempDir dir;
  const PipelineConfig defaults = load_config("");
  CHECK(defaults.codebook.scales == std::vector<std::size_t>{4, 8, 16});
  CHECK(defaults.anls.restarts == 5);

  testing::write_text(dir.file("ok.ini"),
                      "[general]\nseed = 17\n[codebook]\nscales = 2, 6\nsizes = 5,7\nsampling = 0.5\n"
                      "[fit]\nk = 3\ninner_tol = 1e-8\n[archetype.hover]\noffset = 0,0,0.5\nnoise_sigma = 0.1\n"
                      "[synth]\narchetypes = still,hover\n[features]\nnormalize = false\n");
  const PipelineConfig c = load_config(dir.file("ok.ini"));
  CHECK(c.seed == 17);
  CHECK(c.codebook.sizes == std::vector<std::size_t>{5, 7});
  CHECK(c.codebook.sampling == std::optional<double>(0.5));
  CHECK(c.k == 3);
  CHECK(c.anls.inner.tol == 1e-8);
  CHECK(c.synth.archetypes.at("hover").noise_sigma == 0.1);
  CHECK(c.synth.use == std::vector<std::string>{"still", "hover"});
  CHECK_FALSE(c.normalize);

  CHECK(config_hash(c) == config_hash(load_config(dir.file("ok.ini"))));
  CHECK(config_hash(c) != config_hash(defaults));
  CHECK(canonical_text(c).find("codebook.scales=2,6\n") != std::string::npos);

  const std::pair<const char*, const char*> bad[] = {
      {"unknown_key.ini", "[fit]\nkk = 3\n"},
      {"unknown_section.ini", "[fitting]\nk = 3\n"},
      {"lengths.ini", "[codebook]\nscales = 4,8\n"},
      {"order.ini", "[codebook]\nscales = 8,4,16\n"},
      {"fraction.ini", "[fit]\nsample_fraction = 1.5\n"},
      {"zero.ini", "[fit]\nk = 0\n"},
      {"number.ini", "[gmm]\ntol = fast\n"},
      {"method.ini", "[sweep]\nmethods = nnmf,lda\n"},
      {"archetype.ini", "[synth]\narchetypes = still,hover\n"},
      {"loose.ini", "seed = 3\n"},
  };
  for (const auto& [name, text] : bad) {
    testing::write_text(dir.file(name), text);
    INFO(name);
    CHECK_THROWS_AS(load_config(dir.file(name)), ConfigError);
  }
  CHECK_THROWS_AS(load_config(dir.file("absent.ini")), ConfigError);
}
