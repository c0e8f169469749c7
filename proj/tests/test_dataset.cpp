#include <filesystem>

#include "doctest.h"
#include "rashomon/dataset.hpp"
#include "rashomon/error.hpp"
#include "rashomon/synth.hpp"

using namespace rashomon;

TEST_CASE("csv round trip is bitwise") {
  GenConfig c;
  c.n_train = 200;
  c.n_test = 10;
  c.seed = 77;
  const auto [train, test] = generate(c);
  const auto path = (std::filesystem::temp_directory_path() / "rashomon_rt.csv").string();
  write_csv(train, path);
  const Dataset back = read_csv(path);
  CHECK(back == train);
  CHECK(back.target_name() == "y");
  std::filesystem::remove(path);
}

TEST_CASE("csv writes target first with semicolons and LF") {
  Eigen::MatrixXd v(2, 3);
  v << 1.5, 2.0, 0.1, -3.0, 4.0, 1e-300;
  const Dataset d({"x1", "y", "x2"}, "y", v);
  const std::string text = to_csv(d);
  CHECK(text ==
        "y;x1;x2\n"
        "2;1.5;0.10000000000000001\n"
        "4;-3;1e-300\n");
  const Dataset back = from_csv(text);
  CHECK(back.column_names() == std::vector<std::string>{"y", "x1", "x2"});
  CHECK(back.features()(0, 1) == 0.1);
  CHECK(back.target()(1) == 4.0);
}

TEST_CASE("csv header with target y is accepted") {
  const Dataset d = from_csv("y;x1;x2;x3\n1;2;3;4\n");
  CHECK(d.target_name() == "y");
  CHECK(d.feature_names() == std::vector<std::string>{"x1", "x2", "x3"});
  const Dataset quoted = from_csv("\"y\";\"x1\"\r\n0.5;0.25\r\n");
  CHECK(quoted.target()(0) == 0.5);
}

TEST_CASE("ragged row reports its line") {
  try {
    from_csv("y;x1;x2;x3\n1;2;3;4\n1.0;2.0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("malformed cells and headers are rejected") {
  CHECK_THROWS_AS(from_csv(""), ParseError);
  CHECK_THROWS_AS(from_csv("y\n1\n"), ParseError);
  CHECK_THROWS_AS(from_csv("y;y\n1;2\n"), ParseError);
  CHECK_THROWS_AS(from_csv("y;x\n1;abc\n"), ParseError);
  CHECK_THROWS_AS(from_csv("y;x\n1;nan\n"), ParseError);
  CHECK_THROWS_AS(from_csv("y;x\n1;\n"), ParseError);
  CHECK_THROWS_AS(from_csv("y;x\n1;2\n", "z"), ParseError);
}

TEST_CASE("dataset rejects inconsistent construction") {
  CHECK_THROWS_AS(Dataset({"y", "x"}, "z", Eigen::MatrixXd::Zero(1, 2)), SchemaError);
  CHECK_THROWS_AS(Dataset({"y"}, "y", Eigen::MatrixXd::Zero(1, 2)), SchemaError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset({"y", "x"}, "y", bad), SchemaError);
}
