// Serves a model file over the external oracle line protocol on
// stdin/stdout, so any built-in model can stand in for a real one.

#include <iostream>

#include <CLI11.hpp>

#include "hardlabel/external_oracle.hpp"
#include "hardlabel/model_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve a hardlabel model over the external oracle protocol"};
  std::string model_path;
  app.add_option("--model", model_path, "Model file (JSON)")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    hardlabel::LoadedModel m = hardlabel::load_model_file(model_path);
    if (m.model->dimension() == 0) {
      std::cerr << "error: model must declare its dimension (\"d\")\n";
      return 1;
    }
    std::ios::sync_with_stdio(false);
    hardlabel::oracle_protocol::serve(*m.model, std::cin, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
