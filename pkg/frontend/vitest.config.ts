import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node", // render tests opt into jsdom per-file
    include: ["tests/**/*.test.ts"],
  },
});
