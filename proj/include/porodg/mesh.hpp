#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

namespace porodg {

enum class FaceTag { interior, left, right, bottom, top };

enum class FaceOrientation { horizontal, vertical };  // horizontal: normal along y

struct Cell {
    double x0, y0;  // lower-left corner
    double hx, hy;

    double area() const { return hx * hy; }
    double cx() const { return x0 + 0.5 * hx; }
    double cy() const { return y0 + 0.5 * hy; }
};

/// One mesh face. For interior faces the normal points from cell_minus to
/// cell_plus and equals +x (vertical faces) or +y (horizontal faces); for
/// boundary faces cell_plus is -1 and the normal points outward.
struct Face {
    FaceOrientation orientation;
    int cell_minus;
    int cell_plus;  // -1 on the boundary
    double nx, ny;  // unit normal
    double measure;
    FaceTag tag;
    double x0, y0;  // first endpoint
    double x1, y1;  // second endpoint

    bool is_boundary() const { return cell_plus < 0; }
    double cx() const { return 0.5 * (x0 + x1); }
    double cy() const { return 0.5 * (y0 + y1); }
};

/// Structured rectangular mesh of nx-by-ny axis-aligned cells.
///
/// Cells are numbered row-major: cell (i, j) has index j*nx + i.
/// Faces are numbered deterministically: first all horizontal faces by row
/// (index j*nx + i for the face below/above row j, j = 0..ny), then all
/// vertical faces by column (index nx*(ny+1) + i*ny + j, i = 0..nx).
struct Mesh {
    int nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0;
    std::vector<Cell> cells;
    std::vector<Face> faces;

    int n_cells() const { return nx * ny; }
    int n_faces() const { return static_cast<int>(faces.size()); }
    int n_horizontal_faces() const { return nx * (ny + 1); }

    int cell_index(int i, int j) const { return j * nx + i; }
    int horizontal_face_index(int i, int j) const { return j * nx + i; }              // j = 0..ny
    int vertical_face_index(int i, int j) const { return nx * (ny + 1) + i * ny + j; }  // i = 0..nx

    /// Faces of cell c in the fixed order {west, east, south, north}.
    std::array<int, 4> cell_faces(int c) const {
        const int i = c % nx, j = c / nx;
        return {vertical_face_index(i, j), vertical_face_index(i + 1, j),
                horizontal_face_index(i, j), horizontal_face_index(i, j + 1)};
    }

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
};

inline Mesh build_mesh(int nx, int ny, double lx, double ly) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_mesh: cell counts must be positive");
    if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("build_mesh: edge lengths must be positive");

    Mesh m;
    m.nx = nx;
    m.ny = ny;
    m.lx = lx;
    m.ly = ly;
    const double hx = lx / nx, hy = ly / ny;

    m.cells.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.cells.push_back({i * hx, j * hy, hx, hy});

    m.faces.reserve(static_cast<std::size_t>(nx) * (ny + 1) + static_cast<std::size_t>(nx + 1) * ny);

    // Horizontal faces, by row.
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Face f;
            f.orientation = FaceOrientation::horizontal;
            f.measure = hx;
            f.x0 = i * hx;
            f.x1 = (i + 1) * hx;
            f.y0 = f.y1 = j * hy;
            if (j == 0) {
                f.cell_minus = m.cell_index(i, 0);
                f.cell_plus = -1;
                f.nx = 0.0;
                f.ny = -1.0;
                f.tag = FaceTag::bottom;
            } else if (j == ny) {
                f.cell_minus = m.cell_index(i, ny - 1);
                f.cell_plus = -1;
                f.nx = 0.0;
                f.ny = 1.0;
                f.tag = FaceTag::top;
            } else {
                f.cell_minus = m.cell_index(i, j - 1);
                f.cell_plus = m.cell_index(i, j);
                f.nx = 0.0;
                f.ny = 1.0;
                f.tag = FaceTag::interior;
            }
            m.faces.push_back(f);
        }
    }

    // Vertical faces, by column.
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            Face f;
            f.orientation = FaceOrientation::vertical;
            f.measure = hy;
            f.x0 = f.x1 = i * hx;
            f.y0 = j * hy;
            f.y1 = (j + 1) * hy;
            if (i == 0) {
                f.cell_minus = m.cell_index(0, j);
                f.cell_plus = -1;
                f.nx = -1.0;
                f.ny = 0.0;
                f.tag = FaceTag::left;
            } else if (i == nx) {
                f.cell_minus = m.cell_index(nx - 1, j);
                f.cell_plus = -1;
                f.nx = 1.0;
                f.ny = 0.0;
                f.tag = FaceTag::right;
            } else {
                f.cell_minus = m.cell_index(i - 1, j);
                f.cell_plus = m.cell_index(i, j);
                f.nx = 1.0;
                f.ny = 0.0;
                f.tag = FaceTag::interior;
            }
            m.faces.push_back(f);
        }
    }
    return m;
}

struct FaceAdjacency {
    int cell_minus;
    std::optional<int> cell_plus;
    std::array<double, 2> normal;
};

inline FaceAdjacency face_adjacency(const Mesh& mesh, int face_index) {
    if (face_index < 0 || face_index >= mesh.n_faces())
        throw std::out_of_range("face_adjacency: face index out of range");
    const Face& f = mesh.faces[face_index];
    FaceAdjacency a;
    a.cell_minus = f.cell_minus;
    if (f.cell_plus >= 0) a.cell_plus = f.cell_plus;
    a.normal = {f.nx, f.ny};
    return a;
}

/// Sign of the stored face normal relative to the outward normal of cell c
/// at face f: +1 if they agree, -1 otherwise.
inline double face_outward_sign(const Mesh& mesh, int face_index, int c) {
    const Face& f = mesh.faces[face_index];
    if (f.cell_plus < 0) return 1.0;  // boundary normals are stored outward
    return c == f.cell_minus ? 1.0 : -1.0;
}

} // namespace porodg
