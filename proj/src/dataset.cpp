#include "ttda/dataset.hpp"

#include "ttda/tten_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ttda {

namespace fs = std::filesystem;

LabeledTensorSet load_tten_dataset(const fs::path& dir) {
    std::ifstream labels_file(dir / "labels.csv");
    if (!labels_file) throw std::runtime_error("missing labels.csv in " + dir.string());

    std::vector<std::pair<std::string, long>> entries;
    std::string line;
    while (std::getline(labels_file, line)) {
        if (line.empty()) continue;
        if (line == "filename,class") continue;  // optional header
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("labels.csv: malformed line: " + line);
        entries.emplace_back(line.substr(0, comma), std::stol(line.substr(comma + 1)));
    }
    if (entries.empty()) throw std::runtime_error("labels.csv lists no samples");
    std::sort(entries.begin(), entries.end());

    std::map<long, Index> class_of;
    for (const auto& [name, label] : entries) class_of.emplace(label, 0);
    Index next = 0;
    for (auto& [label, idx] : class_of) idx = next++;

    LabeledTensorSet data;
    for (const auto& [name, label] : entries) {
        data.add_sample(class_of.at(label), read_tten(dir / name));
    }
    data.validate(1);
    return data;
}

void save_tten_dataset(const LabeledTensorSet& data, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream labels_file(dir / "labels.csv");
    if (!labels_file) throw std::runtime_error("cannot write labels.csv in " + dir.string());
    labels_file << "filename,class\n";

    char name[48];
    for (Index c = 0; c < data.num_classes(); ++c) {
        for (Index k = 0; k < data.class_size(c); ++k) {
            std::snprintf(name, sizeof(name), "c%03d_k%05d.tten", static_cast<int>(c), static_cast<int>(k));
            write_tten(data.sample(c, k), dir / name);
            labels_file << name << ',' << c << '\n';
        }
    }
}

namespace {

int next_pgm_token(std::istream& in) {
    // skips whitespace and '#' comment lines
    while (in) {
        const int ch = in.peek();
        if (ch == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(ch)) {
            in.get();
        } else {
            break;
        }
    }
    int value;
    if (!(in >> value)) throw std::runtime_error("PGM: malformed header");
    return value;
}

}  // namespace

DenseTensor load_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2") throw std::runtime_error("PGM: unsupported format " + magic);
    const int width = next_pgm_token(in);
    const int height = next_pgm_token(in);
    const int maxval = next_pgm_token(in);
    if (width <= 0 || height <= 0) throw std::runtime_error("PGM: bad dimensions");
    if (maxval != 255) throw std::runtime_error("PGM: only 8-bit images are supported");

    DenseTensor img({height, width});
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> raster(static_cast<std::size_t>(width) * height);
        in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
        if (!in) throw std::runtime_error("PGM: truncated raster");
        for (Index r = 0; r < height; ++r) {
            for (Index c = 0; c < width; ++c) {
                img.at({r, c}) = raster[static_cast<std::size_t>(r * width + c)] / 255.0;
            }
        }
    } else {
        for (Index r = 0; r < height; ++r) {
            for (Index c = 0; c < width; ++c) {
                int value;
                if (!(in >> value)) throw std::runtime_error("PGM: truncated raster");
                img.at({r, c}) = value / 255.0;
            }
        }
    }
    return img;
}

LabeledTensorSet load_pgm_dataset(const fs::path& dir, const Shape& reshape_to) {
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    }
    if (class_dirs.empty()) throw std::runtime_error("no class subdirectories in " + dir.string());
    std::sort(class_dirs.begin(), class_dirs.end());

    LabeledTensorSet data;
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dirs[c])) {
            if (entry.path().extension() == ".pgm") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            DenseTensor img = load_pgm(file);
            if (!reshape_to.empty()) img = reshape(img, reshape_to);
            data.add_sample(static_cast<Index>(c), std::move(img));
        }
    }
    data.validate(1);
    return data;
}

}  // namespace ttda
