// barcode_io.hpp
//
// Barcode serialization: JSON (full fidelity, round-trips exactly) and a
// three-column CSV (dim,birth,death) for plotting.

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "topo/persistence.hpp"

namespace topo {

inline nlohmann::json barcode_to_json(const Barcode& barcode) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Bar& bar : barcode.bars) {
    nlohmann::json j{{"dim", bar.dim},
                     {"birth", bar.birth},
                     {"death", bar.death},
                     {"essential", bar.essential},
                     {"creator", {bar.creator.a, bar.creator.b}}};
    if (bar.destroyer)
      j["destroyer"] = {bar.destroyer->a, bar.destroyer->b};
    else
      j["destroyer"] = nullptr;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline Barcode barcode_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw std::runtime_error("barcode JSON must be an array");
  Barcode barcode;
  for (const auto& j : arr) {
    Bar bar;
    bar.dim = j.at("dim").get<int>();
    bar.birth = j.at("birth").get<double>();
    bar.death = j.at("death").get<double>();
    bar.essential = j.at("essential").get<bool>();
    bar.creator = Cell{j.at("creator").at(0).get<int>(), j.at("creator").at(1).get<int>()};
    if (!j.at("destroyer").is_null())
      bar.destroyer = Cell{j.at("destroyer").at(0).get<int>(), j.at("destroyer").at(1).get<int>()};
    barcode.bars.push_back(bar);
  }
  return barcode;
}

inline void save_barcode_json(const std::string& path, const Barcode& barcode) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write barcode file: " + path);
  out << barcode_to_json(barcode).dump(2) << '\n';
}

inline Barcode load_barcode_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open barcode file: " + path);
  nlohmann::json j;
  in >> j;
  return barcode_from_json(j);
}

inline void save_barcode_csv(const std::string& path, const Barcode& barcode) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write barcode file: " + path);
  out << "dim,birth,death\n";
  char buf[96];
  for (const Bar& bar : barcode.bars) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", bar.dim, bar.birth, bar.death);
    out << buf;
  }
}

}  // namespace topo
