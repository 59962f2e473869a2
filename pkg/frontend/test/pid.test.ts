import { execFile } from "node:child_process";
import { mkdtemp, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { describe, expect, it } from "vitest";

import {
  Broja2PidError,
  copyGate,
  gateDecomposition,
  listGates,
  pid,
  pidFull,
  type PdfEntry,
  type ReturnData,
} from "../src/index.js";

const run = promisify(execFile);
const OPTIONS = { baseUrl: "http://127.0.0.1:8761" };

const AND_ENTRIES: PdfEntry[] = [
  { x: 0, y: 0, z: 0, p: 0.25 },
  { x: 0, y: 0, z: 1, p: 0.25 },
  { x: 0, y: 1, z: 0, p: 0.25 },
  { x: 1, y: 1, z: 1, p: 0.25 },
];

const AND_RECORD = {
  "[0,0,0]": 0.25,
  "[0,0,1]": 0.25,
  "[0,1,0]": 0.25,
  "[1,1,1]": 0.25,
};

async function cliReturnData(entries: PdfEntry[]): Promise<ReturnData> {
  const dir = await mkdtemp(join(tmpdir(), "conepid-"));
  const path = join(dir, "dist.json");
  await writeFile(path, JSON.stringify(entries));
  const { stdout } = await run("python3", ["-m", "conepid.cli", "pid", path]);
  return JSON.parse(stdout.trim()) as ReturnData;
}

describe("pid", () => {
  it("matches the primary CLI output exactly on the AND gate", async () => {
    const fromBinding = await pid(AND_ENTRIES, {}, OPTIONS);
    const fromCli = await cliReturnData(AND_ENTRIES);
    // bit-for-bit: same solver, same defaults, same record
    expect(fromBinding).toStrictEqual(fromCli);
    expect(fromBinding.CI).toBeCloseTo(0.5, 6);
    expect(fromBinding.SI).toBeCloseTo(0.311278, 5);
    expect(Math.max(...fromBinding.Num_err.map(Math.abs))).toBeLessThanOrEqual(1e-6);
  });

  it("accepts record-keyed distributions", async () => {
    const a = await pid(AND_ENTRIES, {}, OPTIONS);
    const b = await pid(AND_RECORD, {}, OPTIONS);
    expect(b).toStrictEqual(a);
  });

  it("supports composite labels", async () => {
    const result = await pid(
      [
        { x: [0, 0], y: 0, z: 0, p: 0.5 },
        { x: [1, 1], y: 1, z: 1, p: 0.5 },
      ],
      {},
      OPTIONS,
    );
    expect(result.SI).toBeCloseTo(1.0, 6);
  });

  it("forwards max_iter and reflects it in the solve metadata", async () => {
    const full = await pidFull(AND_ENTRIES, { max_iter: 1 }, OPTIONS);
    expect(full.status).toBe("max_iterations");
    expect(full.iterations).toBe(1);
    // one barrier round leaves the duality gap wide open
    expect(full.returndata.Num_err[2]).toBeGreaterThan(1.0);

    const relaxed = await pidFull(AND_ENTRIES, { max_iter: 1000 }, OPTIONS);
    expect(relaxed.status).toBe("optimal");
  });

  it("rejects unknown parameter keys, naming the valid ones", async () => {
    await expect(
      // @ts-expect-error deliberately wrong key
      pid(AND_ENTRIES, { bogus: 1 }, OPTIONS),
    ).rejects.toThrow(/valid keys are .*max_iter/);
  });

  it("rejects invalid distributions with a client error", async () => {
    await expect(
      pid([{ x: 0, y: 0, z: 0, p: 0.5 }], {}, OPTIONS),
    ).rejects.toThrow(/request failed \(400\)/);
  });
});

describe("benchmark endpoints", () => {
  it("lists the gate battery", async () => {
    const gates = await listGates(OPTIONS);
    expect(gates).toContain("XOR");
    expect(gates).toHaveLength(7);
  });

  it("runs a battery gate with its expected values", async () => {
    const res = await gateDecomposition("XOR", OPTIONS);
    expect(res.expected).toEqual([0, 0, 0, 1]);
    expect(res.max_deviation).toBeLessThanOrEqual(1e-6);
  });

  it("runs a copy gate and reports deviations", async () => {
    const res = await copyGate(4, 4, {}, OPTIONS);
    expect(res.returndata.UIY).toBeCloseTo(2.0, 6);
    expect(res.uiy_rel_dev).toBeLessThanOrEqual(1e-6);
    expect(res.seconds).toBeGreaterThan(0);
  });

  it("maps solver failures to Broja2PidError", async () => {
    // the error class is part of the public surface even if healthy
    // instances never trigger it here
    expect(new Broja2PidError("boom").name).toBe("Broja2PidError");
  });
});
