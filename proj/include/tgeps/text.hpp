#pragma once

// Text normalization, vocabularies and node-text files.
//
// Characters are bytes: the encoder's character alphabet is the set of byte
// values seen in training words, so UTF-8 text works but multi-byte code
// points contribute several "characters".

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tgeps/common.hpp"

namespace tgeps {

using Tokens = std::vector<std::string>;

/// English stopwords (the NLTK list without its apostrophe forms).
inline const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
        "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
        "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that",
        "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
        "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as",
        "until", "while", "of", "at", "by", "for", "with", "about", "against", "between", "into", "through",
        "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
        "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why", "how",
        "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
        "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "should",
        "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn", "doesn", "hadn",
        "hasn", "haven", "isn", "ma", "mightn", "mustn", "needn", "shan", "shouldn", "wasn", "weren",
        "won", "wouldn"};
    return words;
}

/// Lowercases ASCII, turns ASCII punctuation into separators, splits on
/// whitespace and drops stopwords. Idempotent.
inline Tokens preprocess_text(std::string_view raw) {
    Tokens out;
    std::string cur;
    const auto& stop = stopwords();
    auto flush = [&] {
        if (!cur.empty() && !stop.contains(cur)) out.push_back(cur);
        cur.clear();
    };
    for (char ch : raw) {
        auto u = static_cast<unsigned char>(ch);
        if (u < 128 && (std::isspace(u) || std::ispunct(u) || std::iscntrl(u))) {
            flush();
        } else {
            cur.push_back(u < 128 ? static_cast<char>(std::tolower(u)) : ch);
        }
    }
    flush();
    return out;
}

// -----------------------------------------------------------------------------
// Vocabulary
// -----------------------------------------------------------------------------

class Vocabulary {
public:
    static constexpr std::uint32_t kUnk = 0;
    static constexpr std::string_view kUnkWord = "<unk>";

    Vocabulary() {
        words_.emplace_back(kUnkWord);
        char_index_.fill(-1);
        chars_.push_back(0);
    }

    std::size_t word_count() const noexcept { return words_.size(); }
    std::size_t char_count() const noexcept { return chars_.size(); }

    const std::vector<std::string>& words() const noexcept { return words_; }
    /// Byte value per char index; index 0 is UNK (its stored value is unused).
    const std::vector<unsigned char>& chars() const noexcept { return chars_; }

    std::uint32_t add_word(const std::string& w) {
        auto [it, inserted] = word_index_.emplace(w, static_cast<std::uint32_t>(words_.size()));
        if (inserted) words_.push_back(w);
        return it->second;
    }

    std::uint32_t add_char(unsigned char c) {
        if (char_index_[c] < 0) {
            char_index_[c] = static_cast<std::int32_t>(chars_.size());
            chars_.push_back(c);
        }
        return static_cast<std::uint32_t>(char_index_[c]);
    }

    std::uint32_t word_id(std::string_view w) const {
        auto it = word_index_.find(std::string(w));
        return it == word_index_.end() ? kUnk : it->second;
    }

    std::uint32_t char_id(unsigned char c) const noexcept {
        return char_index_[c] < 0 ? kUnk : static_cast<std::uint32_t>(char_index_[c]);
    }

    bool has_word(std::string_view w) const { return word_index_.contains(std::string(w)); }
    bool has_char(unsigned char c) const noexcept { return char_index_[c] >= 0; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.words_ == b.words_ && a.chars_ == b.chars_;
    }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::uint32_t> word_index_;
    std::vector<unsigned char> chars_;
    std::array<std::int32_t, 256> char_index_{};
};

/// Words with at least `min_count` occurrences, in first-appearance order,
/// plus every byte seen in any word.
inline Vocabulary build_vocab(std::span<const Tokens> sequences, std::size_t min_count = 1) {
    Vocabulary v;
    std::unordered_map<std::string, std::size_t> counts;
    std::vector<std::string> order;
    for (const auto& seq : sequences)
        for (const auto& tok : seq) {
            if (counts[tok]++ == 0) order.push_back(tok);
            for (char c : tok) v.add_char(static_cast<unsigned char>(c));
        }
    for (const auto& w : order)
        if (counts[w] >= min_count) v.add_word(w);
    return v;
}

/// Vocabulary ids for one token: word id (UNK if absent) and per-byte char
/// ids (UNK for unseen bytes).
struct TokenIds {
    std::uint32_t word = Vocabulary::kUnk;
    std::vector<std::uint32_t> chars;
};

/// Maps at most `max_len` tokens to ids. An empty sequence becomes a single
/// UNK token (UNK word, UNK char), the designated stand-in for empty texts.
inline std::vector<TokenIds> encode_tokens(const Tokens& tokens, const Vocabulary& vocab, std::size_t max_len) {
    std::vector<TokenIds> out;
    const std::size_t n = std::min(tokens.size(), max_len);
    out.reserve(std::max<std::size_t>(n, 1));
    for (std::size_t i = 0; i < n; ++i) {
        TokenIds t;
        t.word = vocab.word_id(tokens[i]);
        for (char c : tokens[i]) t.chars.push_back(vocab.char_id(static_cast<unsigned char>(c)));
        if (t.chars.empty()) t.chars.push_back(Vocabulary::kUnk);
        out.push_back(std::move(t));
    }
    if (out.empty()) out.push_back({Vocabulary::kUnk, {Vocabulary::kUnk}});
    return out;
}

// -----------------------------------------------------------------------------
// Node-text file: "node_id<TAB>raw text" per line
// -----------------------------------------------------------------------------

struct NodeText {
    std::string id;
    std::string text;
};

inline std::vector<NodeText> load_node_texts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open node-text file '" + path + "'");
    std::vector<NodeText> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError(path, lineno, "expected node_id<TAB>text");
        out.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return out;
}

inline void write_node_texts(const std::string& path, std::span<const NodeText> texts) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (const auto& t : texts) out << t.id << '\t' << t.text << '\n';
}

} // namespace tgeps
