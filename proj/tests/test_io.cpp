#include <gtest/gtest.h>

#include <sstream>

#include "fracmart/io.hpp"

using namespace fracmart;

TEST(Io, Fnv1aVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Io, ConfigHashIgnoresKeyOrder) {
  const json a = json::parse(R"({"seed": 3, "instance": {"m": 3, "p": 2}})");
  const json b = json::parse(R"({"instance": {"p": 2, "m": 3}, "seed": 3})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(json::parse(R"({"seed": 4, "instance": {"m": 3, "p": 2}})")));
  const auto h = report_header("transform", a, 3);
  EXPECT_EQ(h["tool_version"], kToolVersion);
  EXPECT_EQ(h["seed"], 3);
}

TEST(Io, OperatorForms) {
  const auto T = operator_from_json(json::parse(R"({"m": 3, "matrix": [[0,-1,1],[1,0,-1],[-1,1,0]]})"));
  EXPECT_EQ(T.coefficients().size(), 9u);
  const auto builtin = cyclic_difference_operator();
  EXPECT_TRUE(std::equal(T.coefficients().begin(), T.coefficients().end(), builtin.coefficients().begin()));
  const auto back = operator_from_json(operator_to_json(T));
  EXPECT_TRUE(std::equal(back.coefficients().begin(), back.coefficients().end(), T.coefficients().begin()));
  EXPECT_TRUE(operator_from_json("zero", 4).is_zero());
  EXPECT_THROW(operator_from_json("nope"), ConfigError);
  EXPECT_THROW(operator_from_json(json::parse(R"({"m": 3, "matrix": [[1,0,0],[0,0,0],[0,0,0]]})")), ConfigError);
  EXPECT_THROW(operator_from_json(json::parse(R"({"m": 3})")), ConfigError);
}

TEST(Io, InstanceSpec) {
  const auto spec = InstanceSpec::from_json(json::parse(R"({"m": 3, "p": 2, "phi": "signed-square"})"));
  const auto ctx = spec.context();
  EXPECT_EQ(ctx.alpha(), 0.5);
  EXPECT_EQ(ctx.m(), 3);
  auto bad = spec;
  bad.alpha = 0.3;
  EXPECT_THROW(bad.context(), ConfigError);
  bad = spec;
  bad.phi = "cosine";
  EXPECT_THROW(bad.context(), ConfigError);
  bad = spec;
  bad.m = 4;
  bad.op = json::parse(R"({"m": 3, "matrix": [[0,-1,1],[1,0,-1],[-1,1,0]]})");
  EXPECT_THROW(bad.context(), ConfigError);
  bad.op = "cyclic-difference";
  EXPECT_EQ(bad.context().m(), 4);
  EXPECT_THROW(InstanceSpec::from_json(json::parse(R"({"m": "three"})")), ConfigError);
  EXPECT_THROW(InstanceSpec::from_json(json::array()), ConfigError);
}

TEST(Io, MartingaleRoundTrip) {
  const auto F = Martingale::scalar(3, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9.5});
  EXPECT_EQ(martingale_from_json(martingale_to_json(F)), F);
  EXPECT_THROW(martingale_from_json(json::parse(R"({"m": 3, "depth": 1, "leaves": [1, 2]})")), ConfigError);
}

TEST(Io, SliceCsvRoundTrip) {
  GridSlice s(GridGeometry{5, 7, 3.0});
  s.values[3] = -1.25;
  s.flags[3] = CellFlag::Certified;
  s.values[10] = 0.1;
  s.flags[10] = CellFlag::Heuristic;
  std::stringstream ss;
  write_slice_csv(ss, s);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, 15), "x,y,value,flag\n");
  const auto back = read_slice_csv(ss);
  EXPECT_EQ(back.geometry, s.geometry);
  EXPECT_EQ(back.flags, s.flags);
  EXPECT_EQ(back.values[3], -1.25);
  EXPECT_EQ(back.values[10], 0.1);
  std::stringstream broken("x,y,value\n");
  EXPECT_THROW(read_slice_csv(broken), ConfigError);
}

TEST(Io, WorstCsv) {
  SplitRecord w;
  w.index = 7;
  w.gap = -0.5;
  w.normalized = -0.1;
  w.split = SplitConfiguration{{0.25}, {1, -1, 0}, {1, 1, 0}};
  std::stringstream ss;
  write_worst_csv(ss, {w}, 3);
  EXPECT_EQ(ss.str(), "index,stratum,gap,normalized,y,x1,x2,x3,z1,z2,z3\n7,bulk,-0.5,-0.10000000000000001,0.25,1,-1,0,1,1,0\n");
}

TEST(Io, ReportsSerialize) {
  const auto ctx = example_instance();
  VerifyConfig c;
  c.samples = 2000;
  const auto r = verify_supersolution(Supersolution(ctx, {0.0, 0.0, Branch::Min}), c);
  const json j = to_json(r);
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_GT(j["violations"].get<std::size_t>(), 0u);
  EXPECT_TRUE(j["worst"].is_array());
  EXPECT_EQ(j.dump(), to_json(verify_supersolution(Supersolution(ctx, {0.0, 0.0, Branch::Min}), c)).dump());
  EXPECT_TRUE(num(std::numeric_limits<double>::infinity()).is_null());
  const auto p = params_from_json(to_json(SupersolutionParams{2.0, 3.0, Branch::Min}), 2.0);
  EXPECT_EQ(p.C1, 2.0);
  EXPECT_EQ(p.C2, 3.0);
  EXPECT_THROW(params_from_json(json::parse(R"({"C1": -1, "C2": 0})"), 2.0), ConfigError);
}
