#pragma once

#include <set>
#include <string>
#include <vector>

namespace firstreply {

// Per-word hatefulness ratings: 0 = not hateful, 1 = sometimes, 2 = always.
struct AnnotationSheet {
  std::vector<std::string> words;
  std::vector<std::vector<int>> ratings;  // ratings[i][r]: word i, annotator r
};

struct AnnotationAggregate {
  std::set<std::string> hate_words;  // total rating >= 4
  double fleiss_kappa = 0.0;
};

// CSV with header word,rater1,rater2,...
AnnotationSheet load_annotation_sheet(const std::string& path);

AnnotationAggregate aggregate_annotations(const AnnotationSheet& sheet);

// A community is hateful when it contains strictly more than five hate words.
bool classify_community(int hate_word_count);

}  // namespace firstreply
