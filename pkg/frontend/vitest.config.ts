import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The end-to-end test boots the real trainer service, which renders
    // audio stimuli before answering; allow it time.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
