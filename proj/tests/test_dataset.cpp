#include "helpers.hpp"

#include "cegmon/dataset.hpp"
#include "cegmon/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace cegmon;

namespace {

InputError::Kind load_error(const std::string& text) {
  std::istringstream in(text);
  try {
    load_csv(in, testing::chds_vars());
  } catch (const InputError& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return InputError::Kind::Io;
}

}  // namespace

TEST_CASE("CSV loading keeps file order and maps columns by name") {
  std::istringstream in(
      "X_h,X_s,X_e,X_l,extra\r\n"
      "No,High,Low,Average,1\r\n"
      "Yes,Low,Low,High,2\n"
      "No,\"High\",High,Low,\"a,b\"\n");
  const Dataset d = load_csv(in, testing::chds_vars());
  REQUIRE(d.size() == 3);
  CHECK(std::vector<int>(d.row(0).begin(), d.row(0).end()) == std::vector<int>{0, 1, 1, 0});
  CHECK(std::vector<int>(d.row(1).begin(), d.row(1).end()) == std::vector<int>{1, 1, 2, 1});
  CHECK(std::vector<int>(d.row(2).begin(), d.row(2).end()) == std::vector<int>{0, 0, 0, 0});
  CHECK(d.level_counts(0) == CountVector((CountVector(2) << 2, 1).finished()));
}

TEST_CASE("CSV errors are distinct") {
  CHECK(load_error("") == InputError::Kind::EmptyFile);
  CHECK(load_error("X_s,X_e,X_l\nHigh,High,Low\n") == InputError::Kind::MissingColumn);
  CHECK(load_error("X_s,X_e,X_l,X_h\nHigh,High,Med,No\n") == InputError::Kind::UnknownLevel);
  std::istringstream in("X_s,X_e,X_l,X_h\nHigh,High,Low,No\nHigh,High,Med,No\n");
  try {
    load_csv(in, testing::chds_vars());
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string what = e.what();
    CHECK(what.find("Med") != std::string::npos);
    CHECK(what.find("X_l") != std::string::npos);
    CHECK(what.find("row 2") != std::string::npos);
  }
}

TEST_CASE("CSV round trip") {
  const auto vars = testing::chds_vars();
  const Dataset d = testing::dataset_from_rows(vars, {{0, 1, 2, 1}, {1, 0, 0, 0}});
  std::stringstream ss;
  d.write_csv(ss);
  const Dataset r = load_csv(ss, vars);
  CHECK(r.cases() == d.cases());
}

TEST_CASE("ordering") {
  const auto vars = testing::make_vars({3, 2});
  const Dataset d = testing::dataset_from_rows(vars, {{2, 0}, {0, 1}, {1, 0}, {0, 0}, {2, 1}});
  const Dataset s = order_by(d, "X0");
  CHECK(s.cases().col(0) == Eigen::VectorXi((Eigen::VectorXi(5) << 0, 0, 1, 2, 2).finished()));
  // Stable: ties keep file order.
  CHECK(s.cases().col(1) == Eigen::VectorXi((Eigen::VectorXi(5) << 1, 0, 0, 0, 1).finished()));
  CHECK_THROWS_AS(order_by(d, "nope"), InputError);

  const Dataset a = shuffle(d, 42);
  const Dataset b = shuffle(d, 42);
  CHECK(a.cases() == b.cases());
  CHECK(a.provenance().seed == std::optional<std::uint64_t>{42});
  for (int j = 0; j < 2; ++j) CHECK(a.level_counts(j) == d.level_counts(j));
}
