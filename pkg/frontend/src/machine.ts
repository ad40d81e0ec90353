/** Review-flow state machine, mirrored from the service.
 *
 * TRANSITIONS lists every state change the PATCH endpoint accepts.  The
 * review screen exposes the human decisions only: staged work is approved
 * or rejected, approved work is released or rejected.  Retiring an already
 * released record is an administrative API call, so the released and
 * rejected states render no buttons.
 */

import type { State } from "./api";

export const STATES: readonly State[] = ["staged", "approved", "released", "rejected"];

export const TRANSITIONS: Record<State, readonly State[]> = {
  staged: ["approved", "rejected"],
  approved: ["released", "rejected"],
  released: ["rejected"],
  rejected: [],
};

export interface ReviewButton {
  label: "Approve" | "Reject" | "Release";
  target: State;
  enabled: boolean;
}

const REVIEW_STATES: readonly State[] = ["staged", "approved"];

/** Buttons shown on a record in `state`; enabled only for legal moves. */
export function reviewButtons(state: State): ReviewButton[] {
  if (!REVIEW_STATES.includes(state)) return [];
  const legal = TRANSITIONS[state];
  return [
    { label: "Approve", target: "approved", enabled: legal.includes("approved") },
    { label: "Reject", target: "rejected", enabled: legal.includes("rejected") },
    { label: "Release", target: "released", enabled: legal.includes("released") },
  ];
}
