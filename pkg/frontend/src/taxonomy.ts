/** The fixed activity/position taxonomy used for query chips.
 *
 * These constants only drive form rendering and inline validation; the
 * service re-validates every query and remains the source of truth.
 */
import type { QueryJson } from "./types.js";

export const LONGITUDINAL = [
  "keep velocity",
  "acceleration",
  "deceleration",
] as const;

export const LATERAL = [
  "follow lane",
  "lane change left",
  "lane change right",
] as const;

export const GROUP_MEMBERS: Record<string, readonly string[]> = {
  "same lane": ["front", "behind"],
  "adjacent lane": ["left adjacent lane", "right adjacent lane"],
  "lane next to adjacent lane": [
    "lane next to left adjacent lane",
    "lane next to right adjacent lane",
  ],
};

export const METRIC_KINDS = [
  "DST",
  "RLongA",
  "PSD",
  "DHW",
  "LongJ",
  "LatJ",
  "TTC",
  "PTTC",
  "TET",
  "TIT",
  "THW",
  "DeltaV",
] as const;

function checkPosition(
  role: string,
  pos: { group: string; member: string },
  out: string[],
): void {
  const members = GROUP_MEMBERS[pos.group];
  if (members === undefined) {
    out.push(`${role}: unknown position group '${pos.group}'`);
  } else if (!members.includes(pos.member)) {
    out.push(`${role}: '${pos.member}' is not a member of '${pos.group}'`);
  }
}

/** Inline chip validation; returns human-readable violations. */
export function validateQueryDraft(query: QueryJson): string[] {
  const out: string[] = [];
  if (!(LONGITUDINAL as readonly string[]).includes(query.ego.longitudinal)) {
    out.push(`ego: unknown longitudinal activity '${query.ego.longitudinal}'`);
  }
  if (!(LATERAL as readonly string[]).includes(query.ego.lateral)) {
    out.push(`ego: unknown lateral activity '${query.ego.lateral}'`);
  }
  if (query.targets.length === 0) {
    out.push("query needs at least one target vehicle");
  }
  query.targets.forEach((target, i) => {
    const role = `target #${i + 1}`;
    if (!(LONGITUDINAL as readonly string[]).includes(target.longitudinal)) {
      out.push(`${role}: unknown longitudinal activity '${target.longitudinal}'`);
    }
    if (!(LATERAL as readonly string[]).includes(target.lateral)) {
      out.push(`${role}: unknown lateral activity '${target.lateral}'`);
    }
    checkPosition(`${role} start`, target.start, out);
    checkPosition(`${role} end`, target.end, out);
  });
  return out;
}
