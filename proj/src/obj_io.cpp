#include "texpipe/obj_io.h"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_vertex_line(std::string& out, const char* tag, const vec3& v) {
  out += tag;
  out += ' ';
  append_double(out, v.x);
  out += ' ';
  append_double(out, v.y);
  out += ' ';
  append_double(out, v.z);
  out += '\n';
}

double parse_double(const std::string& token, const std::string& path, int line) {
  double v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw input_error(path + ":" + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

int parse_int(const std::string& token, const std::string& path, int line) {
  int v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw input_error(path + ":" + std::to_string(line) + ": bad index '" + token + "'");
  return v;
}

int resolve_index(int idx, int count, const std::string& path, int line) {
  int resolved = idx > 0 ? idx - 1 : count + idx;
  if (idx == 0 || resolved < 0 || resolved >= count)
    throw input_error(path + ":" + std::to_string(line) + ": index out of range");
  return resolved;
}

struct Corner {
  int v = -1, vt = -1, vn = -1;
};

Corner parse_corner(const std::string& token, int nv, int nvt, int nvn,
                    const std::string& path, int line) {
  Corner c;
  size_t s1 = token.find('/');
  if (s1 == std::string::npos) {
    c.v = resolve_index(parse_int(token, path, line), nv, path, line);
    return c;
  }
  c.v = resolve_index(parse_int(token.substr(0, s1), path, line), nv, path, line);
  size_t s2 = token.find('/', s1 + 1);
  std::string vt_part =
      s2 == std::string::npos ? token.substr(s1 + 1) : token.substr(s1 + 1, s2 - s1 - 1);
  if (!vt_part.empty()) c.vt = resolve_index(parse_int(vt_part, path, line), nvt, path, line);
  if (s2 != std::string::npos) {
    std::string vn_part = token.substr(s2 + 1);
    if (!vn_part.empty()) c.vn = resolve_index(parse_int(vn_part, path, line), nvn, path, line);
  }
  return c;
}

}  // namespace

void save_obj(const std::string& path, const Mesh& mesh, const std::string& texture_relpath) {
  validate(mesh);
  std::string out;
  out.reserve(mesh.positions.size() * 40 + mesh.triangles.size() * 30);

  std::filesystem::path obj_path(path);
  if (!texture_relpath.empty()) {
    std::string mtl_name = obj_path.stem().string() + ".mtl";
    out += "mtllib " + mtl_name + "\n";
    std::filesystem::path mtl_path = obj_path.parent_path() / mtl_name;
    std::ofstream mtl(mtl_path, std::ios::binary);
    if (!mtl) throw input_error("cannot write " + mtl_path.string());
    mtl << "newmtl material0\nKd 1 1 1\nmap_Kd " << texture_relpath << "\n";
  }

  for (auto& p : mesh.positions) append_vertex_line(out, "v", p);
  for (auto& uv : mesh.uvs) {
    out += "vt ";
    append_double(out, uv.x);
    out += ' ';
    append_double(out, uv.y);
    out += '\n';
  }
  for (auto& n : mesh.normals) append_vertex_line(out, "vn", n);

  if (!texture_relpath.empty()) out += "usemtl material0\n";

  bool with_uv = mesh.has_uvs();
  bool with_normal = mesh.has_normals();
  bool with_charts = !mesh.chart_ids.empty();
  int current_chart = -2;
  for (size_t i = 0; i < mesh.triangles.size(); i++) {
    if (with_charts && mesh.chart_ids[i] != current_chart) {
      current_chart = mesh.chart_ids[i];
      out += "g chart_" + std::to_string(current_chart) + "\n";
    }
    auto& t = mesh.triangles[i];
    int pos[3] = {t.x, t.y, t.z};
    int uv[3] = {0, 0, 0};
    if (with_uv) {
      auto& u = mesh.uv_triangles[i];
      uv[0] = u.x;
      uv[1] = u.y;
      uv[2] = u.z;
    }
    out += 'f';
    for (int k = 0; k < 3; k++) {
      out += ' ';
      out += std::to_string(pos[k] + 1);
      if (with_uv) {
        out += '/';
        out += std::to_string(uv[k] + 1);
        if (with_normal) out += '/' + std::to_string(pos[k] + 1);
      } else if (with_normal) {
        out += "//" + std::to_string(pos[k] + 1);
      }
    }
    out += '\n';
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw input_error("cannot write " + path);
  file.write(out.data(), (std::streamsize)out.size());
  if (!file) throw input_error("cannot write " + path);
}

Mesh load_obj(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw input_error("cannot open " + path);

  Mesh mesh;
  std::vector<vec3> vn_pool;
  std::vector<vec3i> vn_triangles;
  bool any_groups = false;
  int current_chart = -1;

  std::string line;
  int line_no = 0;
  std::vector<std::string> tokens;
  while (std::getline(file, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);

    tokens.clear();
    std::istringstream stream(line);
    std::string token;
    while (stream >> token) tokens.push_back(token);
    if (tokens.empty()) continue;

    const std::string& tag = tokens[0];
    if (tag == "v" || tag == "vn") {
      if (tokens.size() < 4)
        throw input_error(path + ":" + std::to_string(line_no) + ": truncated " + tag + " line");
      vec3 v{parse_double(tokens[1], path, line_no), parse_double(tokens[2], path, line_no),
             parse_double(tokens[3], path, line_no)};
      (tag == "v" ? mesh.positions : vn_pool).push_back(v);
    } else if (tag == "vt") {
      if (tokens.size() < 3)
        throw input_error(path + ":" + std::to_string(line_no) + ": truncated vt line");
      mesh.uvs.push_back(
          {parse_double(tokens[1], path, line_no), parse_double(tokens[2], path, line_no)});
    } else if (tag == "f") {
      if (tokens.size() < 4)
        throw input_error(path + ":" + std::to_string(line_no) +
                          ": face with fewer than three vertices");
      std::vector<Corner> corners;
      for (size_t i = 1; i < tokens.size(); i++)
        corners.push_back(parse_corner(tokens[i], (int)mesh.positions.size(),
                                       (int)mesh.uvs.size(), (int)vn_pool.size(), path,
                                       line_no));
      for (size_t i = 2; i < corners.size(); i++) {
        const Corner tri[3] = {corners[0], corners[i - 1], corners[i]};
        mesh.triangles.push_back({tri[0].v, tri[1].v, tri[2].v});
        mesh.uv_triangles.push_back({tri[0].vt, tri[1].vt, tri[2].vt});
        vn_triangles.push_back({tri[0].vn, tri[1].vn, tri[2].vn});
        mesh.chart_ids.push_back(current_chart);
      }
    } else if (tag == "g") {
      any_groups = true;
      current_chart = -1;
      if (tokens.size() >= 2 && tokens[1].rfind("chart_", 0) == 0) {
        std::string id = tokens[1].substr(6);
        int v = 0;
        auto res = std::from_chars(id.data(), id.data() + id.size(), v);
        if (res.ec == std::errc{} && res.ptr == id.data() + id.size()) current_chart = v;
      }
    }
    // mtllib/usemtl/o/s and anything else are ignored.
  }

  bool any_uv = false, all_uv = !mesh.uv_triangles.empty();
  for (auto& t : mesh.uv_triangles) {
    bool has = t.x >= 0 && t.y >= 0 && t.z >= 0;
    any_uv |= has;
    all_uv &= has;
  }
  if (any_uv && !all_uv) throw input_error(path + ": inconsistent texture coordinates");
  if (!any_uv) {
    mesh.uvs.clear();
    mesh.uv_triangles.clear();
  }

  bool any_vn = false;
  for (auto& t : vn_triangles) any_vn |= t.x >= 0 || t.y >= 0 || t.z >= 0;
  if (any_vn) {
    mesh.normals.assign(mesh.positions.size(), vec3{0, 0, 0});
    for (size_t i = 0; i < vn_triangles.size(); i++) {
      auto& t = mesh.triangles[i];
      auto& n = vn_triangles[i];
      if (n.x >= 0) mesh.normals[t.x] = vn_pool[n.x];
      if (n.y >= 0) mesh.normals[t.y] = vn_pool[n.y];
      if (n.z >= 0) mesh.normals[t.z] = vn_pool[n.z];
    }
  }

  if (!any_groups) mesh.chart_ids.clear();
  validate(mesh);
  return mesh;
}

}  // namespace texpipe
