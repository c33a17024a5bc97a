import init, { demo_scenario, demo_align, demo_flow_fit } from "./pkg/toolpath_demo.js";

const status = document.getElementById("status");

// ---- tiny orthographic renderer ------------------------------------------

// Fixed tilted view: rotate about z then x, drop the depth coordinate.
const YAW = -0.6, TILT = -1.05;
function project([x, y, z]) {
  const c = Math.cos(YAW), s = Math.sin(YAW);
  const x1 = c * x - s * y, y1 = s * x + c * y;
  const ct = Math.cos(TILT), st = Math.sin(TILT);
  const y2 = ct * y1 - st * z, z2 = st * y1 + ct * z;
  return [x1, y2, z2];
}

function makeViewport(canvas, clouds) {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const cloud of clouds) {
    for (const p of cloud) {
      const [px, py] = project(p);
      if (px < minX) minX = px;
      if (px > maxX) maxX = px;
      if (py < minY) minY = py;
      if (py > maxY) maxY = py;
    }
  }
  const pad = 30;
  const scale = Math.min(
    (canvas.width - 2 * pad) / Math.max(maxX - minX, 1e-6),
    (canvas.height - 2 * pad) / Math.max(maxY - minY, 1e-6),
  );
  return ([x, y, z]) => {
    const [px, py] = project([x, y, z]);
    return [
      pad + (px - minX) * scale,
      canvas.height - pad - (py - minY) * scale,
    ];
  };
}

function drawCloud(ctx, view, points, color, size = 2) {
  ctx.fillStyle = color;
  for (const p of points) {
    const [x, y] = view(p);
    ctx.fillRect(x - size / 2, y - size / 2, size, size);
  }
}

function legend(ctx, entries) {
  let y = 16;
  ctx.font = "12px system-ui";
  for (const [color, label] of entries) {
    ctx.fillStyle = color;
    ctx.fillRect(8, y - 8, 10, 10);
    ctx.fillStyle = "#333";
    ctx.fillText(label, 24, y);
    y += 16;
  }
}

function call(fn, ...args) {
  const out = JSON.parse(fn(...args));
  if (out.error) throw new Error(out.error);
  return out;
}

// ---- section 1: scenario --------------------------------------------------

let scenario = null;
const scCanvas = document.getElementById("sc-canvas");

function drawScenario() {
  if (!scenario) return;
  const t = Math.min(+document.getElementById("sc-frame").value, scenario.horizon);
  document.getElementById("sc-frame-label").textContent = `t = ${t}`;
  const ctx = scCanvas.getContext("2d");
  ctx.clearRect(0, 0, scCanvas.width, scCanvas.height);
  const view = makeViewport(scCanvas, [scenario.obs, scenario.goal, ...scenario.frames]);
  drawCloud(ctx, view, scenario.obs, "#9a9a9a");
  drawCloud(ctx, view, scenario.goal, "#2e9e44");
  drawCloud(ctx, view, scenario.frames[t], "#2a6fd6", 3);
  legend(ctx, [
    ["#9a9a9a", "observed mass"],
    ["#2e9e44", "goal mass"],
    ["#2a6fd6", `generated frame ${t}`],
  ]);
}

document.getElementById("sc-run").addEventListener("click", () => {
  try {
    scenario = call(
      demo_scenario,
      document.getElementById("sc-task").value,
      +document.getElementById("sc-seed").value,
      +document.getElementById("sc-horizon").value,
    );
    const slider = document.getElementById("sc-frame");
    slider.max = scenario.horizon;
    slider.value = 0;
    status.textContent = "";
    drawScenario();
  } catch (e) {
    status.textContent = e.message;
  }
});
document.getElementById("sc-frame").addEventListener("input", drawScenario);

// ---- section 2: alignment -------------------------------------------------

let aligned = null;
let alignedScenario = null;
const alCanvas = document.getElementById("al-canvas");

function drawAlignment() {
  if (!aligned) return;
  const t = Math.min(+document.getElementById("al-frame").value, aligned.horizon);
  const ctx = alCanvas.getContext("2d");
  ctx.clearRect(0, 0, alCanvas.width, alCanvas.height);
  const view = makeViewport(alCanvas, [
    alignedScenario.obs,
    ...alignedScenario.frames,
    ...aligned.fitted_frames,
  ]);
  drawCloud(ctx, view, alignedScenario.obs, "#9a9a9a");
  drawCloud(ctx, view, alignedScenario.frames[t], "#2a6fd6", 3);
  drawCloud(ctx, view, aligned.fitted_frames[t], "#d6542a", 3);
  legend(ctx, [
    ["#9a9a9a", "observed mass"],
    ["#2a6fd6", `generated frame ${t}`],
    ["#d6542a", `fitted tool frame ${t}`],
  ]);

  // Per-frame residual bars along the bottom edge.
  const bars = aligned.per_frame_chamfer;
  const peak = Math.max(...bars, 1e-9);
  const w = Math.min(30, (alCanvas.width - 40) / bars.length);
  bars.forEach((v, i) => {
    const h = Math.max(2, (v / peak) * 60);
    ctx.fillStyle = i === t ? "#d6542a" : "#bbb";
    ctx.fillRect(20 + i * (w + 3), alCanvas.height - 8 - h, w, h);
  });
  ctx.fillStyle = "#333";
  ctx.fillText("per-frame Chamfer", 20, alCanvas.height - 74);
}

document.getElementById("al-run").addEventListener("click", () => {
  const task = document.getElementById("al-task").value;
  const seed = +document.getElementById("al-seed").value;
  const horizon = +document.getElementById("al-horizon").value;
  status.textContent = "optimizing…";
  // Let the status paint before the solver blocks the main thread.
  setTimeout(() => {
    try {
      alignedScenario = call(demo_scenario, task, seed, horizon);
      aligned = call(
        demo_align,
        task,
        seed,
        horizon,
        document.getElementById("al-thorough").checked,
      );
      const slider = document.getElementById("al-frame");
      slider.max = aligned.horizon;
      slider.value = aligned.horizon;
      const mean =
        aligned.per_frame_chamfer.reduce((a, b) => a + b, 0) /
        aligned.per_frame_chamfer.length;
      document.getElementById("al-readout").textContent =
        `reset cost      ${aligned.reset_cost.toExponential(3)}  (converged: ${aligned.reset_converged})\n` +
        `mean chamfer    ${mean.toExponential(3)}\n` +
        `material score  ${aligned.score.toFixed(3)}  (sinkhorn converged: ${aligned.sinkhorn_converged})`;
      status.textContent = "";
      drawAlignment();
    } catch (e) {
      status.textContent = e.message;
    }
  }, 20);
});
document.getElementById("al-frame").addEventListener("input", drawAlignment);

// ---- section 3: flow fit --------------------------------------------------

const flCanvas = document.getElementById("fl-canvas");

function drawFlow() {
  try {
    const angle = +document.getElementById("fl-angle").value;
    document.getElementById("fl-angle-label").textContent = `${angle}°`;
    const out = call(
      demo_flow_fit,
      angle,
      +document.getElementById("fl-tx").value,
      +document.getElementById("fl-ty").value,
      +document.getElementById("fl-tz").value,
    );
    const ctx = flCanvas.getContext("2d");
    ctx.clearRect(0, 0, flCanvas.width, flCanvas.height);
    const view = makeViewport(flCanvas, [out.base, out.displaced]);
    ctx.strokeStyle = "rgba(120,120,120,0.35)";
    out.base.forEach((p, i) => {
      const [x1, y1] = view(p);
      const [x2, y2] = view(out.displaced[i]);
      ctx.beginPath();
      ctx.moveTo(x1, y1);
      ctx.lineTo(x2, y2);
      ctx.stroke();
    });
    drawCloud(ctx, view, out.base, "#2a6fd6", 3);
    drawCloud(ctx, view, out.displaced, "#d6542a", 3);
    legend(ctx, [
      ["#2a6fd6", "base cloud"],
      ["#d6542a", "displaced cloud"],
    ]);
    const q = out.fitted_pose.quaternion.map((v) => v.toFixed(6)).join(", ");
    document.getElementById("fl-readout").textContent =
      `fitted quaternion (w,x,y,z)  ${q}\n` +
      `rotation error   ${out.rotation_error_deg.toExponential(2)}°\n` +
      `translation err  ${out.translation_error.toExponential(2)} m\n` +
      `determinant      ${out.determinant.toFixed(12)}`;
    status.textContent = "";
  } catch (e) {
    status.textContent = e.message;
  }
}

for (const id of ["fl-angle", "fl-tx", "fl-ty", "fl-tz"]) {
  document.getElementById(id).addEventListener("input", drawFlow);
}

// ---- boot -----------------------------------------------------------------

init()
  .then(() => {
    status.textContent = "";
    document.getElementById("sc-run").click();
    drawFlow();
  })
  .catch((e) => {
    status.textContent = `failed to load wasm module: ${e}`;
  });
