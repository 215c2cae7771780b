#include "asclens/dataset.hpp"

namespace asclens {

namespace {

using Slot = std::vector<std::string>;

const Slot kDeterminers = {"the", "a", "this", "that"};

const Slot kSubjects = {"teacher", "baker",  "doctor", "farmer",  "chef",   "student",
                        "boy",     "girl",   "man",    "woman",   "child",  "driver",
                        "pilot",   "nurse",  "king",   "queen",   "soldier", "artist",
                        "player",  "worker", "officer", "lawyer", "mother", "father",
                        "friend",  "manager", "writer", "singer"};

const Slot kTransitiveVerbs = {"baked",  "chased", "ate",    "built",  "cleaned", "painted",
                               "opened", "closed", "watched", "found", "lost",    "fixed",
                               "washed", "read",   "wrote",  "bought", "sold",    "cooked",
                               "carried", "caught", "broke", "kicked", "pulled",  "pushed",
                               "held",   "visited", "loved", "hated",  "saw",     "killed"};

const Slot kTransitiveObjects = {"cake",   "mouse",  "ball",  "house",   "car",    "door",
                                 "window", "book",   "letter", "box",    "bag",    "table",
                                 "chair",  "bread",  "apple", "bottle",  "cup",    "phone",
                                 "key",    "bike",   "boat",  "picture", "song",   "gift",
                                 "shirt",  "hat",    "wall",  "bed"};

const Slot kDitransitiveVerbs = {"gave",    "sent",  "handed", "offered", "brought", "showed",
                                 "told",    "taught", "sold",  "lent",    "passed",  "threw",
                                 "owed",    "promised", "paid", "wrote",  "bought",  "made",
                                 "cooked",  "baked", "served", "mailed",  "tossed",  "granted",
                                 "left",    "got",   "fed",    "found"};

const Slot kIndirectObjects = {"him",   "her",   "them",   "us",    "me",    "john",
                               "mary",  "sarah", "david",  "emma",  "james", "anna",
                               "peter", "lucy",  "mark",   "paul",  "susan", "tom",
                               "kate",  "jack",  "alice",  "george", "henry", "laura",
                               "mike",  "linda", "robert", "julia", "frank", "nancy"};

const Slot kDitransitiveObjects = {"homework", "money",  "food",   "water",  "books",  "flowers",
                                   "advice",   "letters", "gifts", "tickets", "coffee", "tea",
                                   "bread",    "milk",   "candy",  "music",  "news",   "toys",
                                   "cards",    "shoes",  "clothes", "paper", "wine",   "soup",
                                   "fruit",    "rice",   "apples", "cake"};

const Slot kMotionVerbs = {"pushed", "pulled",  "threw",  "kicked", "rolled", "dragged",
                           "moved",  "carried", "tossed", "sent",   "chased", "drove",
                           "led",    "lifted",  "dropped", "put",   "placed", "brought",
                           "guided", "shot",    "hit",    "knocked", "took",  "walked",
                           "followed", "passed", "poured"};

const Slot kMotionObjects = {"cart",  "ball",  "box",   "car",    "bag",   "table",
                             "chair", "dog",   "cat",   "boat",   "bike",  "truck",
                             "horse", "stone", "rock",  "book",   "bottle", "cup",
                             "key",   "coin",  "toy",   "bucket", "sheep", "cow",
                             "child", "bed"};

const Slot kMotionPrepositions = {"into",  "onto",   "across", "through", "towards",
                                  "over",  "under",  "along",  "behind",  "past",
                                  "around", "down",  "up",     "inside",  "toward"};

const Slot kPlaces = {"garage", "garden", "house",  "room",   "kitchen", "street",
                      "river",  "lake",   "field",  "park",   "yard",    "forest",
                      "hall",   "office", "station", "bridge", "road",   "hill",
                      "tunnel", "door",   "window", "wall",   "fence",   "corner",
                      "building", "church", "school"};

const Slot kResultVerbs = {"cut",    "broke",  "smashed", "tore",   "sliced", "chopped",
                           "crushed", "split", "ripped",  "turned", "folded", "shaped",
                           "formed", "made",   "changed", "beat",   "burned", "ground",
                           "melted", "pressed", "rolled", "divided", "cooked", "baked",
                           "froze",  "twisted", "bent"};

const Slot kResultObjects = {"cake",  "vase",  "bread",  "paper", "glass", "wood",
                             "ice",   "water", "metal",  "clay",  "dough", "cheese",
                             "meat",  "fruit", "apple",  "rock",  "stone", "cloth",
                             "rope",  "wall",  "plate",  "bottle", "window", "log",
                             "sheet", "board"};

const Slot kResultPrepositions = {"into", "to"};

const Slot kResultStates = {"pieces",  "slices", "bits",   "halves", "parts",   "chunks",
                            "strips",  "dust",   "ice",    "ashes",  "powder",  "shape",
                            "shapes",  "balls",  "squares", "circles", "rings", "cubes",
                            "sections", "layers", "stone", "gold",   "water",   "steam",
                            "smoke",   "sticks", "lines"};

SlotVocabulary build_default() {
  SlotVocabulary v;
  v.slots[index_of(ConstructionLabel::transitive)] = {
      kDeterminers, kSubjects, kTransitiveVerbs, kDeterminers, kTransitiveObjects};
  v.slots[index_of(ConstructionLabel::ditransitive)] = {
      kDeterminers, kSubjects, kDitransitiveVerbs, kIndirectObjects, kDitransitiveObjects};
  v.slots[index_of(ConstructionLabel::caused_motion)] = {
      kDeterminers,        kSubjects,    kMotionVerbs, kDeterminers, kMotionObjects,
      kMotionPrepositions, kDeterminers, kPlaces};
  v.slots[index_of(ConstructionLabel::resultative)] = {
      kDeterminers, kSubjects,           kResultVerbs, kDeterminers,
      kResultObjects, kResultPrepositions, kResultStates};
  return v;
}

}  // namespace

const SlotVocabulary& default_vocabulary() {
  static const SlotVocabulary vocab = build_default();
  return vocab;
}

}  // namespace asclens
