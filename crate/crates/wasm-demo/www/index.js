import init, { charging_curve, gap_bounds, solve_small } from "./pkg/elrp_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (form, name) => Number(form.elements[name].value);

function show(out, fn) {
  out.classList.remove("error");
  try {
    return fn();
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e);
    return null;
  }
}

function drawCurve(curve) {
  const c = $("curve");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 30;
  const tMax = Math.max(...curve.points.map((p) => Math.max(p.time, p.linear_time)));
  const sx = (q) => pad + (q / 16) * (c.width - 2 * pad);
  const sy = (t) => c.height - pad - (t / tMax) * (c.height - 2 * pad);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  for (const [key, color] of [["linear_time", "#c60"], ["time", "#06c"]]) {
    g.strokeStyle = color;
    g.beginPath();
    curve.points.forEach((p, i) => (i ? g.lineTo(sx(p.soc), sy(p[key])) : g.moveTo(sx(p.soc), sy(p[key]))));
    g.stroke();
  }
  g.fillStyle = "#222";
  g.fillText("SoC (kWh)", c.width / 2 - 20, c.height - 8);
  g.fillText(`time (h), full after ${curve.time_to_full.toFixed(2)} h`, pad, pad - 10);
}

function drawMap(sol) {
  const c = $("map");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const xs = sol.nodes.map((n) => n.x);
  const ys = sol.nodes.map((n) => n.y);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const span = Math.max(x1 - x0, y1 - y0, 1);
  const px = (x) => 30 + ((x - x0) / span) * (c.width - 60);
  const py = (y) => c.height - 30 - ((y - y0) / span) * (c.height - 60);
  const at = (id) => sol.nodes[id];
  const colors = ["#06c", "#c60", "#093", "#939", "#900", "#066"];
  sol.routes.forEach((r, k) => {
    g.strokeStyle = colors[k % colors.length];
    g.beginPath();
    r.forEach((v, i) => (i ? g.lineTo(px(at(v).x), py(at(v).y)) : g.moveTo(px(at(v).x), py(at(v).y))));
    g.stroke();
  });
  for (const n of sol.nodes) {
    const open = sol.open_stations.includes(n.id);
    g.fillStyle = n.kind === "depot" ? "#000" : n.kind === "station" ? (open ? "#2a2" : "#bbb") : "#06c";
    const r = n.kind === "customer" ? 4 : 6;
    if (n.kind === "station") g.fillRect(px(n.x) - r, py(n.y) - r, 2 * r, 2 * r);
    else {
      g.beginPath();
      g.arc(px(n.x), py(n.y), r, 0, 2 * Math.PI);
      g.fill();
    }
    g.fillStyle = "#222";
    g.fillText(String(n.id), px(n.x) + 7, py(n.y) - 7);
  }
}

const fmt = (v, digits = 4) => (v === null || v === undefined ? "n/a" : v.toFixed(digits));

function wire() {
  $("curve-form").addEventListener("submit", (e) => {
    e.preventDefault();
    const f = e.target;
    const out = $("curve-out");
    const curve = show(out, () => JSON.parse(charging_curve(num(f, "power"), num(f, "seed"))));
    if (!curve) return;
    drawCurve(curve);
    out.textContent = "breakpoints (kWh, h): " + curve.breakpoints.map(([q, t]) => `(${q.toFixed(2)}, ${t.toFixed(3)})`).join(" ");
  });

  $("gap-form").addEventListener("submit", (e) => {
    e.preventDefault();
    const f = e.target;
    const out = $("gap-out");
    const r = show(out, () =>
      JSON.parse(gap_bounds(num(f, "slow"), num(f, "fast"), num(f, "seed"), num(f, "cf"), num(f, "cl"), num(f, "cfo"), num(f, "clo")))
    );
    if (!r) return;
    out.textContent = r.empty_window
      ? "empty SoC window: the fast path cannot be entered"
      : `extra charging time at most ${fmt(r.dt_bar)} h\nenergy shortfall at most ${fmt(r.dq_bar)} kWh`;
  });

  $("solve-form").addEventListener("submit", (e) => {
    e.preventDefault();
    const f = e.target;
    const out = $("solve-out");
    out.textContent = "solving...";
    const sol = show(out, () => JSON.parse(solve_small(num(f, "customers"), num(f, "stations"), num(f, "seed"))));
    if (!sol) return;
    drawMap(sol);
    out.textContent = [
      `${sol.name}: ${sol.status}, objective ${fmt(sol.objective)} h`,
      `routes: ${sol.routes.map((r) => r.join("-")).join("  ")}`,
      `open stations: ${sol.open_stations.join(", ") || "none"}`,
      `linear model: objective ${fmt(sol.objective_linear)} h, stations ${sol.stations_linear.join(", ") || "none"}`,
      `linear decisions under true charging: ${fmt(sol.objective_star)} h (gap ${fmt(sol.nl_gap, 2)} %)`,
    ].join("\n");
  });
}

init().then(() => {
  $("status").textContent = "Ready.";
  wire();
}, (e) => {
  $("status").textContent = `Failed to load the module: ${e}`;
  $("status").classList.add("error");
});
