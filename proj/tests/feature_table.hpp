#pragma once

#include <vector>

// Feature list transcribed by hand: label, level, FV index range (0 = absent
// from FV), FVS membership.
struct ExpectedFeature {
  const char* label;
  const char* level;
  int first;
  int last;
  bool fvs;
};

inline const std::vector<ExpectedFeature> kExpectedFeatures = {
    {"EO", "Scalar", 1, 1, true},
    {"ISlice", "Slice", 2, 2, true},
    {"PSlice", "Slice", 3, 3, false},
    {"BSlice", "Slice", 4, 4, false},
    {"PBSlice", "Slice", 0, 0, true},
    {"IntraBlocks", "Blockpel", 5, 17, true},
    {"ISP", "Blockpel", 18, 30, false},
    {"IntraPDPC", "Blockpel", 31, 43, false},
    {"MIP", "Blockpel", 44, 56, false},
    {"IBC", "Blockpel", 57, 69, false},
    {"InterInter", "Blockpel", 70, 82, false},
    {"InterMerge", "Blockpel", 83, 95, false},
    {"InterCU", "Blockpel", 0, 0, true},
    {"InterSkip", "Blockpel", 96, 108, true},
    {"Affine", "Blockpel", 109, 121, false},
    {"TriangleSplit", "Blockpel", 122, 134, false},
    {"DMVR", "Blockpel", 135, 147, false},
    {"BDOF", "Blockpel", 148, 160, false},
    {"Uni", "Pel", 161, 161, true},
    {"Bi", "Pel", 162, 162, true},
    {"FracPelHor", "Pel", 163, 163, true},
    {"FracPelVer", "Pel", 164, 164, true},
    {"FracPelBoth", "Pel", 165, 165, true},
    {"CopyPel", "Pel", 166, 166, true},
    {"Transform", "Blockpel", 167, 179, true},
    {"TransformSkip", "Blockpel", 180, 192, false},
    {"TransformNoCbf", "Blockpel", 193, 205, false},
    {"LFNST", "Blockpel", 206, 218, false},
    {"Coeff", "Pel", 219, 219, true},
    {"CoeffG1", "Pel", 220, 220, false},
    {"Val", "PelLog", 221, 221, true},
    {"BS0", "Boundary", 222, 222, false},
    {"BS1", "Boundary", 223, 223, false},
    {"BS2", "Boundary", 224, 224, false},
    {"BS", "Boundary", 0, 0, true},
    {"SAO Luma BO", "CTB", 225, 225, false},
    {"SAO Luma EO", "CTB", 226, 226, false},
    {"SAO Chroma BO", "CTB", 227, 227, false},
    {"SAO Chroma EO", "CTB", 228, 228, false},
    {"SAO", "CTB", 0, 0, true},
    {"ALF Luma", "CTB", 229, 229, false},
    {"ALF Chroma", "CTB", 230, 230, false},
    {"ALF", "CTB", 0, 0, true},
};

