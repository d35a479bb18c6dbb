/* Copyright 2026 The stepsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stepsim/catalog.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "stepsim/error.h"

namespace stepsim {
namespace {

using LD = LatencyDistribution;

TEST(KernelKey, ParseAndFormat) {
  EXPECT_EQ(KernelKey::parse("gemm").to_string(), "gemm");
  EXPECT_EQ(KernelKey::parse("gemm@3"), (KernelKey{"gemm", 3}));
  EXPECT_EQ((KernelKey{"a", 12}).to_string(), "a@12");
  EXPECT_THROW(KernelKey::parse("gemm@x"), InputError);
  EXPECT_THROW(KernelKey::parse("gemm@-1"), InputError);
  EXPECT_THROW(KernelKey::parse(""), InputError);
}

TEST(Catalog, RankEntryWinsOverDefault) {
  DistributionCatalog c;
  c.set("k", LD::point_mass(1.0));
  c.set(KernelKey{"k", 2}, LD::point_mass(2.0));
  EXPECT_EQ(c.resolve("k", 2), LD::point_mass(2.0));
  EXPECT_EQ(c.resolve("k", 5), LD::point_mass(1.0));
  EXPECT_EQ(c.resolve("k", std::nullopt), LD::point_mass(1.0));
  EXPECT_TRUE(c.contains_kernel("k"));
  EXPECT_EQ(c.kernels(), std::vector<std::string>{"k"});
  EXPECT_EQ(c.size(), 2u);
}

TEST(Catalog, MissIsAnError) {
  DistributionCatalog c;
  c.set(KernelKey{"k", 2}, LD::point_mass(2.0));
  EXPECT_EQ(c.find("k", 3), nullptr);
  try {
    c.resolve("k", 3);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unresolved kernel key"), std::string::npos);
  }
}

TEST(Catalog, JsonRoundTrip) {
  DistributionCatalog c;
  c.set("g", LD::gaussian(1e-3, 2e-5));
  c.set("e", LD::empirical({3e-4, 1e-4, 2e-4}));
  c.set(KernelKey{"p", 7}, LD::point_mass(0.5));
  const auto j = catalog_to_json(c);
  EXPECT_EQ(j["g"]["type"], "gaussian");
  EXPECT_EQ(j["p@7"]["type"], "point");
  EXPECT_EQ(catalog_from_json(j), c);

  const auto path = std::filesystem::temp_directory_path() / "stepsim_catalog_test.json";
  save_catalog(c, path);
  EXPECT_EQ(load_catalog(path), c);
  std::filesystem::remove(path);
}

TEST(Catalog, RejectsMalformedEntries) {
  EXPECT_THROW(catalog_from_json(nlohmann::json::array()), InputError);
  EXPECT_THROW(catalog_from_json({{"k", {{"type", "weibull"}}}}), InputError);
  EXPECT_THROW(catalog_from_json({{"k", {{"type", "gaussian"}, {"mu", 1.0}}}}), InputError);
  EXPECT_THROW(catalog_from_json({{"k", {{"type", "gaussian"}, {"mu", 1.0}, {"sigma", -1.0}}}}),
               InputError);
  EXPECT_THROW(load_catalog("/nonexistent/catalog.json"), InputError);
}

}  // namespace
}  // namespace stepsim
