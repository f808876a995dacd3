/** Chat event frames as the service emits them (docs/interface.md §3). */
export const ARROW = "→";
