#pragma once

#include <random>
#include <string>
#include <vector>

#include "dialsum/corpus.hpp"

namespace dialsum {

// Deterministic templated dialogues for smoke tests and demos. Slots are
// drawn from small pools so a laptop-scale model can fit the corpus.
inline std::vector<Sample> make_toy_samples(size_t n, uint64_t seed = 7) {
    static const std::vector<std::string> kNames = {"Anna", "Ben",   "Carla", "David", "Emma",
                                                    "Frank", "Grace", "Henry", "Ivy",   "Jack"};
    static const std::vector<std::string> kItems = {"book",  "bike",   "lamp",   "table",
                                                    "phone", "jacket", "guitar", "camera"};
    static const std::vector<std::string> kPlaces = {"park",    "cafe",   "office",
                                                     "library", "station", "market"};
    static const std::vector<std::string> kTimes = {"noon",    "Monday",  "Friday",
                                                    "tonight", "tomorrow", "Sunday"};

    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& pool) {
        return pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
    };

    std::vector<Sample> samples;
    for (size_t i = 0; i < n; ++i) {
        std::string a = pick(kNames);
        std::string b = pick(kNames);
        while (b == a) b = pick(kNames);
        std::string item = pick(kItems);
        std::string place = pick(kPlaces);
        std::string time = pick(kTimes);

        Sample s;
        s.dialogue.id = "toy-" + std::to_string(i);
        auto turn = [&](const std::string& who, const std::string& what) {
            s.dialogue.turns.push_back({who, what});
        };
        switch (i % 3) {
            case 0:  // buying
                turn(a, "hi " + b);
                turn(b, "hi " + a + " what is up");
                turn(a, "do you still have the " + item + " for sale");
                turn(b, "yes it is in good shape");
                turn(a, "great can I see it at the " + place + " " + time);
                turn(b, "sure see you there");
                s.references = {a + " wants to buy the " + item + " from " + b + ". She will come to the " +
                                place + " " + time + "."};
                break;
            case 1:  // meeting
                turn(a, "hey are you free " + time);
                turn(b, "yes why");
                turn(a, "lets meet at the " + place);
                turn(b, "ok see you there");
                s.references = {a + " and " + b + " will meet at the " + place + " " + time + "."};
                break;
            default:  // borrowing
                turn(a, "can I borrow your " + item);
                turn(b, "of course no problem");
                turn(a, "thanks I need it for the weekend");
                turn(b, "just bring it back to the " + place);
                s.references = {a + " wants to borrow the " + item + " from " + b +
                                ". She will bring it back to the " + place + "."};
                break;
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace dialsum
