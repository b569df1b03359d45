import init, { problem_view, contour_grid, trajectory, convergence, mu_curve } from "./pkg/stp_demo.js";

const COLORS = { stp: "#1f77b4", pstp: "#2ca02c", rgf: "#ff7f0e", dds: "#d62728" };
const PAD = { left: 58, right: 16, top: 14, bottom: 40 };

const $ = (id) => document.getElementById(id);

function report(el, text, isError = false) {
  el.textContent = text;
  el.classList.toggle("error", isError);
}

// Maps data coordinates to canvas pixels; `log` axes take log10 first.
function frame(canvas, xr, yr, { logX = false, logY = false } = {}) {
  const w = canvas.width - PAD.left - PAD.right;
  const h = canvas.height - PAD.top - PAD.bottom;
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const [x0, x1] = xr.map(tx);
  const [y0, y1] = yr.map(ty);
  return {
    w, h, logX, logY, xr, yr,
    px: (x) => PAD.left + ((tx(x) - x0) / (x1 - x0)) * w,
    py: (y) => PAD.top + h - ((ty(y) - y0) / (y1 - y0)) * h,
  };
}

function ticks(lo, hi, log) {
  if (log) {
    const out = [];
    for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e++) out.push(10 ** e);
    return out;
  }
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / 5));
  const nice = [1, 2, 5, 10].map((m) => m * step).find((s) => span / s <= 6);
  const out = [];
  for (let v = Math.ceil(lo / nice) * nice; v <= hi + 1e-12; v += nice) out.push(+v.toPrecision(12));
  return out;
}

function fmtTick(v, log) {
  if (log) return `1e${Math.round(Math.log10(v))}`;
  return Math.abs(v) >= 1e4 ? v.toExponential(0) : String(v);
}

function axes(ctx, f, xlabel, ylabel) {
  ctx.save();
  ctx.strokeStyle = "#9aa3ad";
  ctx.fillStyle = "#5c6670";
  ctx.font = "12px system-ui, sans-serif";
  ctx.strokeRect(PAD.left, PAD.top, f.w, f.h);
  ctx.textAlign = "center";
  for (const t of ticks(f.xr[0], f.xr[1], f.logX)) {
    const x = f.px(t);
    ctx.beginPath();
    ctx.moveTo(x, PAD.top + f.h);
    ctx.lineTo(x, PAD.top + f.h + 4);
    ctx.stroke();
    ctx.fillText(fmtTick(t, f.logX), x, PAD.top + f.h + 17);
  }
  ctx.textAlign = "right";
  for (const t of ticks(f.yr[0], f.yr[1], f.logY)) {
    const y = f.py(t);
    ctx.beginPath();
    ctx.moveTo(PAD.left - 4, y);
    ctx.lineTo(PAD.left, y);
    ctx.stroke();
    ctx.fillText(fmtTick(t, f.logY), PAD.left - 7, y + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText(xlabel, PAD.left + f.w / 2, PAD.top + f.h + 34);
  ctx.translate(14, PAD.top + f.h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
}

function legend(ctx, entries) {
  ctx.save();
  ctx.font = "12px system-ui, sans-serif";
  let y = PAD.top + 16;
  const x = ctx.canvas.width - PAD.right - 120;
  for (const [name, color, dashed] of entries) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.setLineDash(dashed ? [5, 4] : []);
    ctx.beginPath();
    ctx.moveTo(x, y - 4);
    ctx.lineTo(x + 22, y - 4);
    ctx.stroke();
    ctx.fillStyle = "#1b1f24";
    ctx.fillText(name, x + 28, y);
    y += 17;
  }
  ctx.restore();
}

// ---- trajectories ---------------------------------------------------------

const contourCache = new Map();

function contourImage(problem, view, w, h) {
  const key = `${problem}:${w}x${h}`;
  if (contourCache.has(key)) return contourCache.get(key);
  const res = 160;
  const grid = contour_grid(problem, view[0], view[1], view[2], view[3], res);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of grid) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const shift = lo - 1e-3 * (hi - lo + 1e-12);
  const scaled = grid.map((v) => Math.log10(v - shift));
  const smin = Math.min(...scaled);
  const smax = Math.max(...scaled);
  const img = new ImageData(res, res);
  for (let j = 0; j < res; j++) {
    for (let i = 0; i < res; i++) {
      const t = (scaled[j * res + i] - smin) / (smax - smin);
      // Bands every 1/14 of the log range give contour-like stripes.
      const band = Math.floor(t * 14) % 2 === 0 ? 0 : 10;
      const o = ((res - 1 - j) * res + i) * 4;
      img.data[o] = 235 - 120 * t - band;
      img.data[o + 1] = 242 - 90 * t - band;
      img.data[o + 2] = 250 - 40 * t - band;
      img.data[o + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(res, res);
  off.getContext("2d").putImageData(img, 0, 0);
  contourCache.set(key, off);
  return off;
}

function drawTrajectory() {
  const canvas = $("t-canvas");
  const ctx = canvas.getContext("2d");
  const status = $("t-status");
  const problem = $("t-problem").value;
  const method = $("t-method").value;
  const alpha0 = 10 ** Number($("t-alpha").value);
  $("t-alpha-label").textContent = alpha0.toPrecision(3);
  try {
    const view = problem_view(problem);
    const pts = trajectory(problem, method, alpha0, Number($("t-seed").value) >>> 0, Number($("t-evals").value) >>> 0);
    const f = frame(canvas, [view[0], view[1]], [view[2], view[3]]);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.imageSmoothingEnabled = true;
    ctx.drawImage(contourImage(problem, view, f.w, f.h), PAD.left, PAD.top, f.w, f.h);
    axes(ctx, f, "x₁", "x₂");
    ctx.save();
    ctx.beginPath();
    ctx.rect(PAD.left, PAD.top, f.w, f.h);
    ctx.clip();
    ctx.strokeStyle = COLORS[method];
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    for (let i = 0; i < pts.length; i += 4) {
      const [x, y] = [f.px(pts[i]), f.py(pts[i + 1])];
      if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    }
    ctx.stroke();
    const dot = (x, y, color, r) => {
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(f.px(x), f.py(y), r, 0, 2 * Math.PI);
      ctx.fill();
    };
    dot(view[4], view[5], "#1b1f24", 4);
    if (!Number.isNaN(view[6])) dot(view[6], view[7], "#ffbf00", 5);
    const n = pts.length;
    dot(pts[n - 4], pts[n - 3], COLORS[method], 4);
    ctx.restore();
    const iters = n / 4 - 1;
    report(status, `f = ${pts[n - 2].toExponential(4)} after ${pts[n - 1]} evaluations` +
      ` (${iters} iterations shown; black = start, gold = minimiser)`);
  } catch (e) {
    report(status, String(e), true);
  }
}

// ---- convergence race -----------------------------------------------------

function drawRace() {
  const canvas = $("r-canvas");
  const ctx = canvas.getContext("2d");
  const status = $("r-status");
  const n = Number($("r-n").value);
  $("r-n-label").textContent = n;
  const methods = [...document.querySelectorAll("#race input[data-method]")]
    .filter((c) => c.checked)
    .map((c) => c.dataset.method);
  try {
    const budget = Number($("r-evals").value) >>> 0;
    const seed = Number($("r-seed").value) >>> 0;
    const alpha0 = Number($("r-alpha").value);
    const curves = methods.map((m) => [m, convergence(m, n, alpha0, seed, budget)]);
    const floor = 1e-9;
    const f = frame(canvas, [1, Math.max(10, budget)], [floor, 1.5], { logX: true, logY: true });
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    axes(ctx, f, "function evaluations", "relative gap");
    ctx.save();
    ctx.beginPath();
    ctx.rect(PAD.left, PAD.top, f.w, f.h);
    ctx.clip();
    const finals = [];
    for (const [m, c] of curves) {
      ctx.strokeStyle = COLORS[m];
      ctx.lineWidth = 1.8;
      ctx.beginPath();
      for (let i = 0; i < c.length; i += 2) {
        const x = f.px(Math.max(1, c[i]));
        const y = f.py(Math.max(floor, c[i + 1]));
        if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
      }
      ctx.stroke();
      finals.push(`${m.toUpperCase()}: ${c[c.length - 1].toExponential(2)} at ${c[c.length - 2]}`);
    }
    ctx.restore();
    legend(ctx, curves.map(([m]) => [m.toUpperCase(), COLORS[m], false]));
    report(status, finals.join("   "));
  } catch (e) {
    report(status, String(e), true);
  }
}

// ---- sphere constant ------------------------------------------------------

function drawMu() {
  const canvas = $("m-canvas");
  const ctx = canvas.getContext("2d");
  const status = $("m-status");
  try {
    const rows = mu_curve(Number($("m-n").value) >>> 0, Number($("m-samples").value) >>> 0, Number($("m-seed").value) >>> 0);
    const maxN = rows[rows.length - 5];
    const f = frame(canvas, [2, maxN], [0, 0.7]);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    axes(ctx, f, "dimension n", "μ");
    const line = (col, color, dashed) => {
      ctx.strokeStyle = color;
      ctx.lineWidth = 2;
      ctx.setLineDash(dashed ? [5, 4] : []);
      ctx.beginPath();
      for (let i = 0; i < rows.length; i += 5) {
        const [x, y] = [f.px(rows[i]), f.py(rows[i + col])];
        if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
      }
      ctx.stroke();
      ctx.setLineDash([]);
    };
    line(1, COLORS.stp, false);
    line(2, "#8c564b", true);
    let inside = 0;
    ctx.fillStyle = "#1b1f24";
    ctx.strokeStyle = "#1b1f24";
    ctx.lineWidth = 1;
    for (let i = 0; i < rows.length; i += 5) {
      const [n, exact, , est, se] = rows.slice(i, i + 5);
      if (Math.abs(est - exact) <= 2 * se) inside++;
      ctx.beginPath();
      ctx.moveTo(f.px(n), f.py(est - 2 * se));
      ctx.lineTo(f.px(n), f.py(est + 2 * se));
      ctx.stroke();
      ctx.beginPath();
      ctx.arc(f.px(n), f.py(est), 2.2, 0, 2 * Math.PI);
      ctx.fill();
    }
    legend(ctx, [["exact", COLORS.stp, false], ["1/√(2πn)", "#8c564b", true]]);
    const count = rows.length / 5;
    report(status, `${inside} of ${count} estimates within 2 standard errors of the exact value` +
      ` (about ${Math.round(0.954 * count)} expected)`);
  } catch (e) {
    report(status, String(e), true);
  }
}

await init();

for (const id of ["t-problem", "t-method", "t-alpha", "t-evals", "t-seed"]) $(id).addEventListener("input", drawTrajectory);
$("t-resample").addEventListener("click", () => {
  $("t-seed").value = Number($("t-seed").value) + 1;
  drawTrajectory();
});
for (const el of document.querySelectorAll("#race input")) el.addEventListener("input", drawRace);
$("m-run").addEventListener("click", drawMu);

drawTrajectory();
drawRace();
drawMu();
