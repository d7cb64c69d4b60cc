#include <gtest/gtest.h>

#include "porodg/mesh.hpp"

using namespace porodg;

TEST(Mesh, SingleCellCounts) {
    const Mesh m = build_mesh(1, 1, 1.0, 1.0);
    EXPECT_EQ(m.n_cells(), 1);
    EXPECT_EQ(m.n_faces(), 4);
    for (const Face& f : m.faces) EXPECT_TRUE(f.is_boundary());
}

TEST(Mesh, TwoByTwoCounts) {
    const Mesh m = build_mesh(2, 2, 1.0, 1.0);
    EXPECT_EQ(m.n_cells(), 4);
    EXPECT_EQ(m.n_faces(), 12);
    int boundary = 0, interior = 0;
    for (const Face& f : m.faces) (f.is_boundary() ? boundary : interior)++;
    EXPECT_EQ(boundary, 8);
    EXPECT_EQ(interior, 4);
}

TEST(Mesh, UniformPartitionAreas) {
    const Mesh m = build_mesh(3, 2, 3.0, 2.0);
    EXPECT_EQ(m.n_cells(), 6);
    double total = 0.0;
    for (const Cell& c : m.cells) {
        EXPECT_NEAR(c.area(), 1.0, 1e-15);
        total += c.area();
    }
    EXPECT_NEAR(total, 6.0, 1e-14);
}

TEST(Mesh, FaceCountFormula) {
    for (int nx : {1, 2, 3, 5})
        for (int ny : {1, 2, 4}) {
            const Mesh m = build_mesh(nx, ny, 1.0, 2.0);
            EXPECT_EQ(m.n_faces(), nx * (ny + 1) + (nx + 1) * ny);
            EXPECT_EQ(m.n_cells(), nx * ny);
        }
}

TEST(Mesh, RejectsBadDimensions) {
    EXPECT_THROW(build_mesh(0, 1, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(build_mesh(1, -2, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(build_mesh(1, 1, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(build_mesh(1, 1, 1.0, -1.0), std::invalid_argument);
}

TEST(FaceAdjacency, SingleCellLeftFaceOutwardNormal) {
    const Mesh m = build_mesh(1, 1, 1.0, 1.0);
    const auto a = face_adjacency(m, m.vertical_face_index(0, 0));
    EXPECT_EQ(a.cell_minus, 0);
    EXPECT_FALSE(a.cell_plus.has_value());
    EXPECT_DOUBLE_EQ(a.normal[0], -1.0);
    EXPECT_DOUBLE_EQ(a.normal[1], 0.0);
}

TEST(FaceAdjacency, MiddleFaceLeftToRight) {
    const Mesh m = build_mesh(2, 1, 1.0, 1.0);
    const auto a = face_adjacency(m, m.vertical_face_index(1, 0));
    EXPECT_EQ(a.cell_minus, 0);
    ASSERT_TRUE(a.cell_plus.has_value());
    EXPECT_EQ(*a.cell_plus, 1);
    EXPECT_DOUBLE_EQ(a.normal[0], 1.0);
    EXPECT_DOUBLE_EQ(a.normal[1], 0.0);
}

TEST(FaceAdjacency, InteriorCount2x2) {
    const Mesh m = build_mesh(2, 2, 1.0, 1.0);
    int with_plus = 0;
    for (int f = 0; f < m.n_faces(); ++f)
        if (face_adjacency(m, f).cell_plus.has_value()) ++with_plus;
    EXPECT_EQ(with_plus, 4);
}

TEST(FaceAdjacency, OutOfRangeThrows) {
    const Mesh m = build_mesh(1, 1, 1.0, 1.0);
    EXPECT_THROW(face_adjacency(m, -1), std::out_of_range);
    EXPECT_THROW(face_adjacency(m, 4), std::out_of_range);
}

// For every cell, the signed sum of face measure times outward normal
// vanishes (discrete divergence theorem).
TEST(MeshProperties, DiscreteDivergenceTheorem) {
    const Mesh m = build_mesh(4, 3, 2.0, 1.5);
    for (int c = 0; c < m.n_cells(); ++c) {
        double sx = 0.0, sy = 0.0;
        for (int f : m.cell_faces(c)) {
            const Face& face = m.faces[f];
            const double s = face_outward_sign(m, f, c);
            sx += s * face.measure * face.nx;
            sy += s * face.measure * face.ny;
        }
        EXPECT_NEAR(sx, 0.0, 1e-14);
        EXPECT_NEAR(sy, 0.0, 1e-14);
    }
}

// Interior faces: the outward normal of cell_minus equals minus the outward
// normal of cell_plus, i.e. the stored normal is shared consistently.
TEST(MeshProperties, InteriorNormalConsistency) {
    const Mesh m = build_mesh(3, 3, 1.0, 1.0);
    for (int f = 0; f < m.n_faces(); ++f) {
        const Face& face = m.faces[f];
        if (face.is_boundary()) continue;
        EXPECT_DOUBLE_EQ(face_outward_sign(m, f, face.cell_minus), 1.0);
        EXPECT_DOUBLE_EQ(face_outward_sign(m, f, face.cell_plus), -1.0);
    }
}

TEST(MeshProperties, CellFacesMatchAdjacency) {
    const Mesh m = build_mesh(3, 2, 1.0, 1.0);
    for (int c = 0; c < m.n_cells(); ++c)
        for (int f : m.cell_faces(c)) {
            const Face& face = m.faces[f];
            EXPECT_TRUE(face.cell_minus == c || face.cell_plus == c);
        }
}
