// Regenerates the data behind the IDS/DOS figures: kappa = 2.8 on [-1, 0],
// and the hydrogen and carbon presets in eV.
//
//   figure_tables [output-dir]

#include <filesystem>
#include <iostream>

#include "sawtooth/sawtooth.hpp"

using namespace sawtooth;

static void write_table(const std::filesystem::path& path, const Lattice& lattice, EnergyUnit unit,
                        std::size_t points) {
  TabulateOptions opt;
  opt.n_points = points;
  opt.unit = unit;
  const SpectralTable t = tabulate(lattice, opt);
  write_file_atomic(path, to_csv(t));
  std::cout << path.string() << ": " << t.rows.size() << " rows\n";
}

static void write_bands(const std::filesystem::path& path, const Lattice& lattice) {
  const BandTable table = band_edges(lattice, 0.0);
  std::string body = csv_line({"p", "e_min", "e_max"});
  for (const Band& b : table.bands) {
    body += csv_line({std::to_string(b.p), format_double(b.e_min), format_double(b.e_max)});
  }
  write_file_atomic(path, body);
  std::cout << path.string() << ": " << table.bands.size() << " bands starting below 0\n";
}

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "figures";
  std::filesystem::create_directories(dir);
  try {
    const Lattice k28 = Lattice::from_kappa(2.8);
    write_bands(dir / "bands_kappa2.8.csv", k28);
    write_table(dir / "ids_dos_kappa2.8.csv", k28, EnergyUnit::dimensionless, 2000);

    const Lattice hydrogen = Lattice::preset(Preset::hydrogen);
    const Lattice carbon = Lattice::preset(Preset::carbon);
    write_bands(dir / "bands_hydrogen.csv", hydrogen);
    write_bands(dir / "bands_carbon.csv", carbon);
    write_table(dir / "ids_dos_hydrogen_eV.csv", hydrogen, EnergyUnit::ev, 2000);
    write_table(dir / "ids_dos_carbon_eV.csv", carbon, EnergyUnit::ev, 4000);
  } catch (const std::exception& e) {
    std::cerr << "figure_tables: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
