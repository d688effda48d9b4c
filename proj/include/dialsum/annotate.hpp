#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dialsum/io.hpp"

namespace dialsum {

enum class Pos { Noun, Propn, Verb, Pron, Other };

inline Pos parse_pos(std::string_view s) {
    if (s == "NOUN") return Pos::Noun;
    if (s == "PROPN") return Pos::Propn;
    if (s == "VERB" || s == "AUX") return Pos::Verb;
    if (s == "PRON") return Pos::Pron;
    return Pos::Other;
}

inline const char* pos_name(Pos p) {
    switch (p) {
        case Pos::Noun: return "NOUN";
        case Pos::Propn: return "PROPN";
        case Pos::Verb: return "VERB";
        case Pos::Pron: return "PRON";
        default: return "OTHER";
    }
}

struct Word {
    std::string text;
    Pos pos = Pos::Other;
    bool is_root = false;
    size_t begin = 0;  // char offsets into the sentence, [begin, end)
    size_t end = 0;
};

struct SentenceAnnotation {
    std::string text;
    std::vector<Word> words;
};

struct Mention {
    size_t sentence = 0;  // sentence index
    size_t begin = 0;     // char span within that sentence
    size_t end = 0;
};

struct CorefChain {
    std::vector<Mention> mentions;  // >= 2, document order
    size_t representative = 0;      // index into mentions; head word not PRON
};

struct Annotation {
    std::vector<SentenceAnnotation> sentences;
    std::vector<size_t> sentence_offsets;  // char offset of each sentence in the source text
    std::vector<CorefChain> chains;
};

enum class AnnotateBackend { external, fallback };

// ---------------------------------------------------------------------------
// Sentence splitting
// ---------------------------------------------------------------------------

namespace annotate_detail {

inline bool is_abbreviation(std::string_view word) {
    static const std::unordered_set<std::string_view> kAbbrev = {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs",
        "etc", "eg", "ie", "approx", "dept", "inc",
    };
    std::string lw;
    for (char c : word) lw += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return kAbbrev.count(lw) > 0;
}

}  // namespace annotate_detail

// Sentence spans [begin, end) into `text`; boundaries after .!? runs followed
// by whitespace and an uppercase letter, digit or opening quote.
inline std::vector<std::pair<size_t, size_t>> split_sentence_spans(std::string_view text) {
    std::vector<std::pair<size_t, size_t>> spans;
    size_t n = text.size();
    size_t start = 0;
    while (start < n && std::isspace(static_cast<unsigned char>(text[start]))) ++start;
    size_t i = start;
    while (i < n) {
        char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            bool is_period = c == '.';
            size_t j = i + 1;
            while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
            while (j < n && (text[j] == '"' || text[j] == '\'' || text[j] == ')')) ++j;
            // word before the terminator, letters only
            size_t wb = i;
            while (wb > start && std::isalpha(static_cast<unsigned char>(text[wb - 1]))) --wb;
            bool abbrev = is_period && annotate_detail::is_abbreviation(text.substr(wb, i - wb));
            size_t k = j;
            while (k < n && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            bool boundary = !abbrev && k > j &&
                            (k == n || std::isupper(static_cast<unsigned char>(text[k])) ||
                             std::isdigit(static_cast<unsigned char>(text[k])) ||
                             text[k] == '"' || text[k] == '\'');
            if (boundary) {
                spans.emplace_back(start, j);
                start = k;
                i = k;
                continue;
            }
            i = j;
            continue;
        }
        ++i;
    }
    if (start < n) {
        size_t end = n;
        while (end > start && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        if (end > start) spans.emplace_back(start, end);
    }
    return spans;
}

inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    for (auto [b, e] : split_sentence_spans(text)) out.emplace_back(text.substr(b, e - b));
    return out;
}

// ---------------------------------------------------------------------------
// Fallback tagger
// ---------------------------------------------------------------------------

namespace annotate_detail {

inline const std::unordered_set<std::string_view>& pronoun_set() {
    static const std::unordered_set<std::string_view> s = {
        "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
        "my", "your", "his", "its", "our", "their", "mine", "yours", "hers", "ours",
        "theirs", "myself", "yourself", "himself", "herself", "itself", "ourselves",
        "themselves", "this", "that", "these", "those", "who", "whom", "whose",
        "someone", "somebody", "anyone", "anybody", "everyone", "everybody", "nobody",
        "it's", "he's", "she's", "they're", "we're", "i'm", "you're", "there's", "that's",
    };
    return s;
}

inline const std::unordered_set<std::string_view>& aux_verb_set() {
    static const std::unordered_set<std::string_view> s = {
        "am", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did",
        "have", "has", "had", "having", "will", "would", "shall", "should", "can",
        "could", "may", "might", "must", "don't", "doesn't", "didn't", "won't",
        "wouldn't", "can't", "cannot", "couldn't", "shouldn't", "isn't", "aren't",
        "wasn't", "weren't", "hasn't", "haven't", "hadn't", "mustn't",
    };
    return s;
}

inline const std::unordered_set<std::string_view>& function_word_set() {
    static const std::unordered_set<std::string_view> s = {
        "the", "a", "an", "and", "or", "but", "if", "because", "so", "as", "of", "in",
        "on", "at", "to", "from", "with", "for", "by", "about", "into", "onto", "over",
        "under", "after", "before", "between", "through", "during", "without", "within",
        "against", "up", "down", "out", "off", "not", "no", "yes", "too", "also", "very",
        "really", "just", "only", "now", "then", "there", "here", "when", "where", "why",
        "how", "what", "which", "while", "than", "again", "always", "never", "sometimes",
        "often", "still", "already", "soon", "today", "tomorrow", "yesterday", "tonight",
        "please", "ok", "okay", "hi", "hello", "hey", "thanks", "thnx", "bye", "goodbye",
        "oh", "wow", "hmm", "yeah", "yep", "nope", "maybe", "perhaps", "well", "sure",
        "all", "some", "any", "each", "every", "both", "few", "more", "most", "other",
        "another", "such", "own", "same", "quite", "rather", "together",
    };
    return s;
}

inline const std::unordered_set<std::string_view>& main_verb_set() {
    static const std::unordered_set<std::string_view> s = {
        "want", "wants", "wanted", "wanting", "come", "comes", "came", "coming", "go",
        "goes", "went", "gone", "going", "get", "gets", "got", "gotten", "getting",
        "make", "makes", "made", "making", "know", "knows", "knew", "known", "knowing",
        "think", "thinks", "thought", "thinking", "take", "takes", "took", "taken",
        "taking", "see", "sees", "saw", "seen", "seeing", "look", "looks", "looked",
        "looking", "say", "says", "said", "saying", "tell", "tells", "told", "telling",
        "ask", "asks", "asked", "asking", "give", "gives", "gave", "given", "giving",
        "find", "finds", "found", "finding", "call", "calls", "called", "calling",
        "try", "tries", "tried", "trying", "need", "needs", "needed", "needing",
        "feel", "feels", "felt", "feeling", "leave", "leaves", "left", "leaving",
        "put", "puts", "putting", "mean", "means", "meant", "keep", "keeps", "kept",
        "let", "lets", "begin", "begins", "began", "begun", "seem", "seems", "seemed",
        "help", "helps", "helped", "helping", "talk", "talks", "talked", "talking",
        "turn", "turns", "turned", "start", "starts", "started", "starting", "show",
        "shows", "showed", "shown", "hear", "hears", "heard", "play", "plays", "played",
        "playing", "run", "runs", "ran", "running", "move", "moves", "moved", "like",
        "likes", "liked", "live", "lives", "lived", "believe", "believes", "believed",
        "hold", "holds", "held", "bring", "brings", "brought", "happen", "happens",
        "happened", "write", "writes", "wrote", "written", "sit", "sits", "sat",
        "stand", "stands", "stood", "lose", "loses", "lost", "pay", "pays", "paid",
        "meet", "meets", "met", "meeting", "continue", "continues", "continued",
        "set", "sets", "learn", "learns", "learned", "change", "changes", "changed",
        "lead", "leads", "led", "understand", "understands", "understood", "watch",
        "watches", "watched", "follow", "follows", "followed", "stop", "stops",
        "stopped", "speak", "speaks", "spoke", "spoken", "read", "reads", "spend",
        "spends", "spent", "grow", "grows", "grew", "grown", "open", "opens", "opened",
        "walk", "walks", "walked", "win", "wins", "won", "offer", "offers", "offered",
        "remember", "remembers", "remembered", "love", "loves", "loved", "buy", "buys",
        "bought", "buying", "wait", "waits", "waited", "waiting", "send", "sends",
        "sent", "sending", "expect", "expects", "expected", "build", "builds", "built",
        "stay", "stays", "stayed", "fall", "falls", "fell", "fallen", "sell", "sells",
        "sold", "suggest", "suggests", "suggested", "decide", "decides", "decided",
        "rent", "rents", "rented", "renting", "visit", "visits", "visited", "visiting",
        "thank", "thanked", "thanking", "sleep", "sleeps", "slept", "sleeping", "eat",
        "eats", "ate", "eaten", "eating", "drink", "drinks", "drank", "cook", "cooks",
        "cooked", "cooking", "clean", "cleans", "cleaned", "plan", "plans", "planned",
        "planning", "agree", "agrees", "agreed", "agreeing", "cancel", "cancels",
        "cancelled", "canceled", "confirm", "confirms", "confirmed", "arrive",
        "arrives", "arrived", "return", "returns", "returned", "prepare", "prepares",
        "prepared", "invite", "invites", "invited", "book", "books", "booked", "pick",
        "picks", "picked", "drop", "drops", "dropped", "fix", "fixes", "fixed",
        "break", "breaks", "broke", "broken", "forget", "forgets", "forgot",
        "forgotten", "miss", "misses", "missed", "share", "shares", "shared",
        "finish", "finishes", "finished", "celebrate", "celebrates", "celebrated",
        "organize", "organizes", "organized", "promise", "promises", "promised",
        "advise", "advises", "advised", "recommend", "recommends", "recommended",
        "borrow", "borrows", "borrowed", "lend", "lends", "lent", "text", "texts",
        "texted", "email", "emails", "emailed",
    };
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool ends_with_sv(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Word characters: alphanumerics plus internal apostrophes/hyphens.
inline std::vector<Word> tokenize_words(std::string_view sentence) {
    std::vector<Word> words;
    size_t i = 0, n = sentence.size();
    auto is_word_char = [&](size_t k) {
        unsigned char c = static_cast<unsigned char>(sentence[k]);
        if (std::isalnum(c)) return true;
        if ((sentence[k] == '\'' || sentence[k] == '-') && k > 0 && k + 1 < n &&
            std::isalnum(static_cast<unsigned char>(sentence[k - 1])) &&
            std::isalnum(static_cast<unsigned char>(sentence[k + 1])))
            return true;
        return false;
    };
    while (i < n) {
        if (!std::isalnum(static_cast<unsigned char>(sentence[i]))) {
            ++i;
            continue;
        }
        size_t b = i;
        while (i < n && is_word_char(i)) ++i;
        Word w;
        w.begin = b;
        w.end = i;
        w.text = std::string(sentence.substr(b, i - b));
        words.push_back(std::move(w));
    }
    return words;
}

inline Pos tag_word(const Word& w) {
    std::string lw = lower(w.text);
    if (pronoun_set().count(lw)) return Pos::Pron;
    if (aux_verb_set().count(lw)) return Pos::Verb;
    if (function_word_set().count(lw)) return Pos::Other;
    if (main_verb_set().count(lw)) return Pos::Verb;
    bool all_digit = !w.text.empty() &&
                     std::all_of(w.text.begin(), w.text.end(),
                                 [](unsigned char c) { return std::isdigit(c); });
    if (all_digit) return Pos::Other;
    if (std::isupper(static_cast<unsigned char>(w.text[0]))) return Pos::Propn;
    if (ends_with_sv(lw, "ly")) return Pos::Other;
    if (ends_with_sv(lw, "ing") || ends_with_sv(lw, "ed")) return Pos::Verb;
    return Pos::Noun;
}

inline bool is_aux(const Word& w) { return aux_verb_set().count(lower(w.text)) > 0; }

// Root: first non-auxiliary verb; else first verb; else first word.
inline size_t root_index(const std::vector<Word>& words) {
    for (size_t i = 0; i < words.size(); ++i)
        if (words[i].pos == Pos::Verb && !is_aux(words[i])) return i;
    for (size_t i = 0; i < words.size(); ++i)
        if (words[i].pos == Pos::Verb) return i;
    return 0;
}

}  // namespace annotate_detail

inline SentenceAnnotation annotate_sentence_fallback(std::string_view sentence) {
    using namespace annotate_detail;
    SentenceAnnotation ann;
    ann.text = std::string(sentence);
    ann.words = tokenize_words(sentence);
    for (auto& w : ann.words) w.pos = tag_word(w);
    if (!ann.words.empty()) ann.words[root_index(ann.words)].is_root = true;
    return ann;
}

// ---------------------------------------------------------------------------
// Fallback coreference
// ---------------------------------------------------------------------------

namespace annotate_detail {

struct PronounSite {
    size_t sentence;
    size_t word;  // word index within sentence
    bool subject;
};

struct NameMention {
    size_t sentence;
    size_t first_word;
    size_t last_word;
    bool subject;
};

// Subject side = strictly before the sentence root.
inline bool before_root(const std::vector<Word>& words, size_t wi) {
    for (size_t i = 0; i < words.size(); ++i)
        if (words[i].is_root) return wi < i;
    return true;
}

}  // namespace annotate_detail

// Third-person subject pronouns bind to the nearest preceding subject name,
// object pronouns to the nearest preceding non-subject name (any name if no
// role match exists). "it" and possessive uses are never linked.
inline std::vector<CorefChain> fallback_coref(const std::vector<SentenceAnnotation>& sentences) {
    using namespace annotate_detail;
    static const std::unordered_set<std::string_view> kSubjectPron = {"he", "she", "they"};
    static const std::unordered_set<std::string_view> kObjectPron = {"him", "her", "them"};

    std::vector<NameMention> names;
    std::vector<PronounSite> sites;
    for (size_t si = 0; si < sentences.size(); ++si) {
        const auto& words = sentences[si].words;
        for (size_t wi = 0; wi < words.size(); ++wi) {
            if (words[wi].pos == Pos::Propn) {
                size_t last = wi;
                while (last + 1 < words.size() && words[last + 1].pos == Pos::Propn) ++last;
                names.push_back({si, wi, last, before_root(words, wi)});
                wi = last;
                continue;
            }
            if (words[wi].pos != Pos::Pron) continue;
            std::string lw = lower(words[wi].text);
            bool subj = kSubjectPron.count(lw) > 0;
            bool obj = kObjectPron.count(lw) > 0;
            if (!subj && !obj) continue;
            if (lw == "her" && wi + 1 < words.size() &&
                (words[wi + 1].pos == Pos::Noun || words[wi + 1].pos == Pos::Propn))
                continue;  // possessive determiner
            sites.push_back({si, wi, subj ? true : before_root(words, wi)});
            if (obj) sites.back().subject = false;
        }
    }

    std::vector<std::vector<PronounSite>> linked(names.size());
    for (const auto& site : sites) {
        int best = -1, best_any = -1;
        for (size_t ni = 0; ni < names.size(); ++ni) {
            const auto& nm = names[ni];
            bool precedes = nm.sentence < site.sentence ||
                            (nm.sentence == site.sentence && nm.last_word < site.word);
            if (!precedes) continue;
            best_any = static_cast<int>(ni);
            if (nm.subject == site.subject) best = static_cast<int>(ni);
        }
        int chosen = best >= 0 ? best : best_any;
        if (chosen >= 0) linked[static_cast<size_t>(chosen)].push_back(site);
    }

    std::vector<CorefChain> chains;
    for (size_t ni = 0; ni < names.size(); ++ni) {
        if (linked[ni].empty()) continue;
        const auto& nm = names[ni];
        const auto& swords = sentences[nm.sentence].words;
        CorefChain chain;
        chain.mentions.push_back(
            {nm.sentence, swords[nm.first_word].begin, swords[nm.last_word].end});
        chain.representative = 0;
        for (const auto& site : linked[ni]) {
            const auto& w = sentences[site.sentence].words[site.word];
            chain.mentions.push_back({site.sentence, w.begin, w.end});
        }
        chains.push_back(std::move(chain));
    }
    return chains;
}

inline Annotation annotate_fallback(std::string_view text) {
    Annotation ann;
    for (auto [b, e] : split_sentence_spans(text)) {
        ann.sentence_offsets.push_back(b);
        ann.sentences.push_back(annotate_sentence_fallback(text.substr(b, e - b)));
    }
    ann.chains = fallback_coref(ann.sentences);
    return ann;
}

// ---------------------------------------------------------------------------
// Pronoun substitution
// ---------------------------------------------------------------------------

namespace annotate_detail {

// A mention is pronominal if its span coincides with a single PRON word.
inline bool mention_is_pronoun(const SentenceAnnotation& s, const Mention& m) {
    for (const auto& w : s.words)
        if (w.begin == m.begin && w.end == m.end) return w.pos == Pos::Pron;
    return false;
}

}  // namespace annotate_detail

// Replaces every pronominal chain mention with its representative's text.
// Replacements are applied right-to-left so earlier spans stay valid.
inline std::string resolve_coreferences(std::string_view summary, const Annotation& ann) {
    struct Repl {
        size_t begin, end;
        std::string text;
    };
    std::vector<Repl> repls;
    for (const auto& chain : ann.chains) {
        if (chain.representative >= chain.mentions.size())
            throw Error("resolve_coreferences: representative index out of range");
        const Mention& rep = chain.mentions[chain.representative];
        if (rep.sentence >= ann.sentences.size())
            throw Error("resolve_coreferences: mention sentence out of range");
        std::string rep_text =
            ann.sentences[rep.sentence].text.substr(rep.begin, rep.end - rep.begin);
        for (size_t mi = 0; mi < chain.mentions.size(); ++mi) {
            if (mi == chain.representative) continue;
            const Mention& m = chain.mentions[mi];
            if (m.sentence >= ann.sentences.size())
                throw Error("resolve_coreferences: mention sentence out of range");
            if (!annotate_detail::mention_is_pronoun(ann.sentences[m.sentence], m)) continue;
            size_t abs_begin = ann.sentence_offsets[m.sentence] + m.begin;
            size_t abs_end = ann.sentence_offsets[m.sentence] + m.end;
            repls.push_back({abs_begin, abs_end, rep_text});
        }
    }
    std::sort(repls.begin(), repls.end(),
              [](const Repl& a, const Repl& b) { return a.begin > b.begin; });
    for (size_t i = 1; i < repls.size(); ++i)
        if (repls[i].end > repls[i - 1].begin)
            throw Error("resolve_coreferences: overlapping replacement spans");
    std::string out(summary);
    for (const auto& r : repls) out.replace(r.begin, r.end - r.begin, r.text);
    return out;
}

inline std::string resolve_coreferences_fallback(std::string_view summary) {
    return resolve_coreferences(summary, annotate_fallback(summary));
}

}  // namespace dialsum
