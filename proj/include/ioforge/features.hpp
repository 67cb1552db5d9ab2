#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ioforge/corpus.hpp"
#include "ioforge/forest.hpp"
#include "ioforge/weaklabel.hpp"

namespace ioforge {

enum class FeatureCategory { behavioral, language, ngram };

std::string to_string(FeatureCategory c);
FeatureCategory feature_category_from_string(const std::string& s);

struct FeatureSchema {
    std::vector<std::string> names;                // unique, ordered
    std::vector<FeatureCategory> categories;       // aligned with names
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::vector<std::string> account_ids;  // row order
    Rows X;                                // dense rows, sparse on disk
};

// The 17 behavioral feature names, in their fixed order.
const std::vector<std::string>& behavioral_feature_names();

// The default language universe (30 Twitter language codes; everything else
// buckets to "other").
const std::vector<std::string>& default_language_universe();

// 17-vector for one account (throws on unknown account).
std::vector<double> extract_behavioral(const Corpus& corpus, const std::string& account_id,
                                       const NewsList& news = {});

// Fraction of the account's tweets per language code; codes outside the
// universe bucket to "other"; zero-tweet accounts give an empty map.
std::map<std::string, double> extract_language_fractions(
    const Corpus& corpus, const std::string& account_id,
    const std::vector<std::string>& universe = default_language_universe());

struct NgramFeatures {
    std::vector<std::string> vocabulary;  // "lang:gram", sorted
    // per account (sorted id order), sparse {column -> normalized count}
    std::vector<std::map<int, double>> rows;
    std::vector<std::string> account_ids;
};

// 1- and 2-gram counts (2-grams from adjacent tokens within a tweet), keyed
// "lang:gram"; grams with total count <= min_count dropped; counts divided by
// the account's retained tweet count.
NgramFeatures build_ngram_features(const Corpus& corpus,
                                   const std::vector<std::string>& account_ids,
                                   std::int64_t min_count = 15);

// Full feature matrix: behavioral block, language block, n-gram block; rows
// are all corpus accounts in sorted id order.
FeatureMatrix assemble_features(const Corpus& corpus, const NewsList& news = {},
                                const std::vector<std::string>& universe =
                                    default_language_universe(),
                                std::int64_t ngram_min_count = 15);

struct SelectSizes {
    std::size_t behavioral = 10;
    std::size_t language = 30;
    std::size_t ngram = 500;
};

// Per category independently: extremely-randomized trees on that category's
// columns, keep the top-k by mean-decrease-impurity (ties by column index);
// sizes clamp to category cardinalities. Selected names are ordered by
// descending importance within each category block.
FeatureSchema select_features(const FeatureMatrix& matrix, const std::vector<int>& y,
                              const SelectSizes& sizes, std::uint64_t seed);

// Matrix restricted to the selected schema's columns, in schema order.
FeatureMatrix reduce_matrix(const FeatureMatrix& matrix, const FeatureSchema& schema);

// Artifacts: <prefix>.schema.json, <prefix>.rows.txt, <prefix>.triplets.csv.
void write_feature_matrix(const FeatureMatrix& matrix, const std::string& prefix);
FeatureMatrix load_feature_matrix(const std::string& prefix);

void write_feature_schema(const FeatureSchema& schema, const std::string& path);
FeatureSchema load_feature_schema(const std::string& path);

}  // namespace ioforge
