#include "va/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace va {

namespace {
constexpr double kFill = 0.5;
}

double ImageGray::sample(double x, double y) const {
    double u = x - 0.5;
    double v = y - 0.5;
    double fx = std::floor(u);
    double fy = std::floor(v);
    int x0 = static_cast<int>(fx);
    int y0 = static_cast<int>(fy);
    double ax = u - fx;
    double ay = v - fy;
    auto tap = [&](int xi, int yi) {
        if (xi < 0 || yi < 0 || xi >= width || yi >= height) return kFill;
        return at(xi, yi);
    };
    double top = (1.0 - ax) * tap(x0, y0) + ax * tap(x0 + 1, y0);
    double bot = (1.0 - ax) * tap(x0, y0 + 1) + ax * tap(x0 + 1, y0 + 1);
    return (1.0 - ay) * top + ay * bot;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            if (!tok.empty()) {
                in.unget();
                return tok;
            }
        } else {
            tok.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    return tok;
}

} // namespace

ImageGray load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedFileError("cannot open " + path);
    std::string magic = next_token(in);
    if (magic != "P5") throw MalformedFileError(path + ": not a binary PGM (P5)");
    auto read_int = [&](const char* what) {
        std::string tok = next_token(in);
        if (tok.empty()) throw MalformedFileError(path + ": truncated header");
        for (char c : tok)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw MalformedFileError(path + std::string(": bad ") + what);
        return std::stoi(tok);
    };
    int w = read_int("width");
    int h = read_int("height");
    int maxval = read_int("maxval");
    if (w <= 0 || h <= 0) throw MalformedFileError(path + ": bad dimensions");
    if (maxval < 1 || maxval > 255) throw MalformedFileError(path + ": maxval out of range");
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<size_t>(w) * static_cast<size_t>(h));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw MalformedFileError(path + ": truncated pixel payload");
    ImageGray img(w, h);
    for (size_t i = 0; i < raw.size(); ++i)
        img.pixels[i] = static_cast<double>(raw[i]) / maxval;
    return img;
}

void save_pgm(const ImageGray& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedFileError("cannot write " + path);
    char header[64];
    int n = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", img.width, img.height);
    out.write(header, n);
    std::vector<unsigned char> raw(img.pixels.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double v = img.pixels[i];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw MalformedFileError("write failed: " + path);
}

ImageGray warp_window(const ImageGray& img, const Homography& h, int out_w, int out_h) {
    invert(h);  // reject singular maps up front
    ImageGray out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            Vec2 src = transform_point(h, {x + 0.5, y + 0.5});
            out.at(x, y) = img.sample(src.x, src.y);
        }
    }
    return out;
}

GradientField compute_gradients(const ImageGray& img) {
    if (img.width < 3 || img.height < 3)
        throw ImageTooSmallError("gradient computation needs at least 3x3 pixels");
    GradientField g;
    g.width = img.width;
    g.height = img.height;
    g.magnitude.resize(img.pixels.size());
    g.angle.resize(img.pixels.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double gx, gy;
            if (x == 0)
                gx = img.at(1, y) - img.at(0, y);
            else if (x == img.width - 1)
                gx = img.at(x, y) - img.at(x - 1, y);
            else
                gx = (img.at(x + 1, y) - img.at(x - 1, y)) / 2.0;
            if (y == 0)
                gy = img.at(x, 1) - img.at(x, 0);
            else if (y == img.height - 1)
                gy = img.at(x, y) - img.at(x, y - 1);
            else
                gy = (img.at(x, y + 1) - img.at(x, y - 1)) / 2.0;
            double mag = std::sqrt(gx * gx + gy * gy);
            double ang = 0.0;
            if (mag > 0.0) {
                ang = std::atan2(gy, gx);
                if (ang < 0) ang += kPi;
                if (ang >= kPi) ang -= kPi;
            }
            size_t i = static_cast<size_t>(y) * img.width + x;
            g.magnitude[i] = mag;
            g.angle[i] = ang;
        }
    }
    return g;
}

} // namespace va
