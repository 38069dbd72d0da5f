#include "lark/vocabulary.hpp"

#include <algorithm>
#include <cctype>

namespace lark {

int feature_group(std::string_view feature) noexcept {
    auto it = std::find(kFeatureVocabulary.begin(), kFeatureVocabulary.end(), feature);
    if (it == kFeatureVocabulary.end()) return -1;
    return static_cast<int>((it - kFeatureVocabulary.begin()) / kFeaturesPerGroup);
}

std::set<std::string> features_in(std::string_view text) {
    std::set<std::string> found;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view word = text.substr(i, j - i);
        while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front())) && word.front() != '-')
            word.remove_prefix(1);
        while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back())) && word.back() != '-')
            word.remove_suffix(1);
        if (!word.empty() && feature_group(word) >= 0) found.emplace(word);
        i = j;
    }
    return found;
}

}  // namespace lark
