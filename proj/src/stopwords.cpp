#include "verirag/corpus_index.hpp"

namespace verirag::index {

// List version 1: 175 common English function words. The overlap statistic
// depends on this list, so changes require a version bump and golden-test
// refresh.
const StopwordSet& english_stopwords() {
    static const StopwordSet words = {
        "a", "about", "above", "across", "after", "again", "against", "all", "along", "also",
        "am", "among", "an", "and", "any", "are", "around", "as", "at", "away",
        "be", "because", "been", "before", "behind", "being", "below", "beneath", "beside", "besides",
        "between", "beyond", "both", "but", "by",
        "can", "cannot", "could",
        "despite", "did", "do", "does", "doing", "down", "during",
        "each", "either", "except",
        "few", "for", "from", "further",
        "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
        "himself", "his", "how", "however",
        "i", "if", "in", "inside", "into", "is", "it", "its", "itself",
        "just",
        "may", "me", "might", "more", "most", "must", "my", "myself",
        "near", "neither", "no", "nor", "not", "now",
        "of", "off", "on", "once", "only", "onto", "or", "other", "others", "otherwise",
        "our", "ours", "ourselves", "out", "outside", "over", "own",
        "past", "per",
        "same", "shall", "she", "should", "since", "so", "some", "such",
        "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "therefore",
        "these", "they", "this", "those", "though", "through", "throughout", "thus", "to", "too",
        "toward", "towards",
        "under", "underneath", "unless", "until", "unto", "up", "upon",
        "very", "via",
        "was", "we", "were", "what", "when", "whenever", "where", "whereas", "wherever", "whether",
        "which", "while", "who", "whom", "whose", "why", "will", "with", "within", "without",
        "would",
        "yet", "you", "your", "yours", "yourself", "yourselves",
    };
    return words;
}

}  // namespace verirag::index
