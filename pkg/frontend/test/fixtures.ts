/** Synthetic run directory matching the solver's CSV schemas. */
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function makeRunDir(options: { emptySnapshots?: boolean } = {}): string {
  const dir = mkdtempSync(join(tmpdir(), "brokermfg-run-"));
  const n = 20;
  const ts = Array.from({ length: n + 1 }, (_, k) => (2 * k) / n);
  const tReveal = 0.3;

  const curveCsv = (comment: string, header: string[], rows: number[][]): string =>
    [`# ${comment}`, header.join(","), ...rows.map((r) => r.join(","))].join("\n") + "\n";

  writeFileSync(join(dir, "fig1.csv"), curveCsv(
    "information-value density A'_t and its antiderivative A_t (zero at horizon)",
    ["t", "a_prime", "a"],
    ts.map((t) => [t, Math.sin(3 * t) * 100, -Math.cos(3 * t) * 30]),
  ));
  for (const [name, q0] of [["fig2.csv", 0], ["fig3.csv", 200]] as const) {
    writeFileSync(join(dir, name), curveCsv(
      `representative trader with initial inventory ${q0}`,
      ["t", "control", "inventory", "sample_id"],
      ts.map((t) => [t, t > tReveal ? 50 * Math.exp(-t) : 0, q0 + 10 * t, 0]),
    ));
  }
  writeFileSync(join(dir, "fig5.csv"), curveCsv(
    "broker path for the realized drift",
    ["t", "control", "inventory"],
    ts.map((t) => [t, t > tReveal ? 20 : 0, Math.max(0, t - tReveal) * 15]),
  ));

  const fig4Lines = [
    "# population inventory snapshots: histogram bins and mean/std rows per checkpoint",
    "time,kind,left,right,count,mean,std",
  ];
  if (!options.emptySnapshots) {
    for (const time of [0, 1, 2]) {
      fig4Lines.push(`${time},stats,,,,${0.1 * time},${0.5 - 0.1 * time}`);
      for (let bin = 0; bin < 8; bin++) {
        fig4Lines.push(`${time},bin,${bin - 4},${bin - 3},${10 + 5 * bin},,`);
      }
    }
  }
  writeFileSync(join(dir, "fig4.csv"), fig4Lines.join("\n") + "\n");

  writeFileSync(join(dir, "policy.csv"), [
    "# revelation policy",
    "t_reveal,objective_reduced,objective_never,a_min,note",
    `${tReveal},100.0,0.0,-30.0,`,
  ].join("\n") + "\n");

  writeFileSync(join(dir, "manifest.json"), JSON.stringify({
    seed: 7,
    policy: { t_reveal: tReveal, objective_reduced: 100.0 },
    outputs: ["fig1.csv", "fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv",
              "policy.csv", "manifest.json"],
  }, null, 2));
  return dir;
}
