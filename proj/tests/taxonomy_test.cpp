#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "tripletbench/taxonomy.hpp"

using namespace tripletbench;

TEST(Taxonomy, DirectConstruction) {
  const auto tax = fixtures::three_class();
  EXPECT_EQ(tax.num_triplets(), 3u);
  EXPECT_EQ(tax.num_instruments(), 2u);
  EXPECT_EQ(tax.num_verbs(), 2u);
  EXPECT_EQ(tax.num_targets(), 3u);
  EXPECT_EQ(tax.components_of(1), (TripletComponents{0, 1, 2}));
  EXPECT_EQ(tax.components_of(0), (TripletComponents{0, 0, 0}));
  EXPECT_THROW(tax.components_of(7), std::out_of_range);
}

TEST(Taxonomy, RejectsDuplicateIds) {
  const char* doc =
      "triplet_id,instrument_id,verb_id,target_id\n"
      "0,0,0,0\n5,0,1,0\n5,1,0,0\n";
  EXPECT_THROW(parse_taxonomy_csv(doc), TaxonomyError);
}

TEST(Taxonomy, RejectsDuplicateComposition) {
  const char* doc =
      "triplet_id,instrument_id,verb_id,target_id\n"
      "0,0,1,0\n1,0,1,0\n";
  EXPECT_THROW(parse_taxonomy_csv(doc), TaxonomyError);
}

TEST(Taxonomy, RejectsOutOfRangeComponent) {
  const char* doc =
      "triplet_id,instrument_id,verb_id,target_id\n"
      "0,0,0,0\n1,2,0,0\n";
  EXPECT_THROW(parse_taxonomy_csv(doc, ComponentCounts{2, 1, 1}), TaxonomyError);
  EXPECT_NO_THROW(parse_taxonomy_csv(doc, ComponentCounts{3, 1, 1}));
}

TEST(Taxonomy, RejectsEmptyAndMalformed) {
  EXPECT_THROW(parse_taxonomy_csv(""), TaxonomyError);
  EXPECT_THROW(parse_taxonomy_csv("triplet_id,instrument_id,verb_id,target_id\n"), TaxonomyError);
  EXPECT_THROW(parse_taxonomy_csv("triplet_id,instrument_id,verb_id\n0,0,0\n"), TaxonomyError);
  EXPECT_THROW(parse_taxonomy_csv("triplet_id,instrument_id,verb_id,target_id\n0,0,x,0\n"),
               TaxonomyError);
  EXPECT_THROW(parse_taxonomy_csv("triplet_id,instrument_id,verb_id,target_id\n1,0,0,0\n"),
               TaxonomyError);
}

TEST(Taxonomy, InconsistentNamesRejected) {
  const char* doc =
      "triplet_id,instrument_id,verb_id,target_id,instrument,verb,target\n"
      "0,0,0,0,grasper,grasp,liver\n"
      "1,0,1,0,hook,retract,liver\n";
  EXPECT_THROW(parse_taxonomy_csv(doc), TaxonomyError);
}

TEST(Taxonomy, ValidMask) {
  std::vector<TaxonomyRow> rows(3);
  for (std::size_t i = 0; i < 3; ++i) {
    rows[i].triplet_id = i;
    rows[i].components = {0, i, 0};
  }
  rows[2].null_flag = true;
  const TripletTaxonomy with_null(rows);
  EXPECT_EQ(with_null.valid_mask(), (std::vector<bool>{true, true, false}));
  EXPECT_EQ(fixtures::three_class().valid_mask(), (std::vector<bool>{true, true, true}));
}

TEST(Taxonomy, NullByNameAndFlag) {
  const auto tax = fixtures::small();
  EXPECT_EQ(tax.null_triplet_ids(), (std::set<std::size_t>{4, 5}));

  // The explicit flag wins over the names.
  const char* doc =
      "triplet_id,instrument_id,verb_id,target_id,instrument,verb,target,null\n"
      "0,0,0,0,grasper,grasp,liver,0\n"
      "1,0,1,1,grasper,null-verb,Null_Target,0\n"
      "2,1,1,1,hook,null-verb,Null_Target,\n"
      "3,1,0,0,hook,grasp,liver,1\n";
  const auto flagged = parse_taxonomy_csv(doc);
  EXPECT_EQ(flagged.null_triplet_ids(), (std::set<std::size_t>{2, 3}));
}

TEST(Taxonomy, ChallengeMap) {
  const auto tax = fixtures::cholect50();
  EXPECT_EQ(tax.num_triplets(), 100u);
  EXPECT_EQ(tax.num_instruments(), 6u);
  EXPECT_EQ(tax.num_verbs(), 10u);
  EXPECT_EQ(tax.num_targets(), 15u);
  EXPECT_EQ(tax.null_triplet_ids().size(), 6u);
  const auto mask = tax.valid_mask();
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 94);
  // components_of is injective.
  std::set<TripletComponents> seen;
  for (std::size_t t = 0; t < tax.num_triplets(); ++t) seen.insert(tax.components_of(t));
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Taxonomy, RowsInAnyOrder) {
  const char* doc =
      "triplet_id,instrument_id,verb_id,target_id\n"
      "2,1,0,2\n0,0,0,0\n1,0,1,2\n";
  const auto tax = parse_taxonomy_csv(doc);
  EXPECT_EQ(tax.components_of(2), (TripletComponents{1, 0, 2}));
  EXPECT_EQ(tax.triplet_name(2), "1:0:2");
}
